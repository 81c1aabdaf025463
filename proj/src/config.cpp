#include "hjfund/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hjfund {

namespace {

// --- expression grammar -----------------------------------------------------

struct Scanner {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  bool accept(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool accept_word(const std::string& w) {
    skip_ws();
    if (s.compare(pos, w.size(), w) == 0) {
      pos += w.size();
      return true;
    }
    return false;
  }
  std::optional<double> number() {
    skip_ws();
    size_t start = pos;
    size_t p = pos;
    if (p < s.size() && (s[p] == '+' || s[p] == '-')) ++p;
    size_t digits = p;
    while (p < s.size() && (std::isdigit(static_cast<unsigned char>(s[p])) || s[p] == '.')) ++p;
    if (p == digits) return std::nullopt;
    if (p < s.size() && (s[p] == 'e' || s[p] == 'E')) {
      size_t q = p + 1;
      if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
      size_t ed = q;
      while (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) ++q;
      if (q > ed) p = q;
    }
    double value = std::stod(s.substr(start, p - start));
    pos = p;
    return value;
  }
};

// cos(2*pi*x) or cos(2*pi*k*x); returns the integer mode.
int parse_cos(Scanner& sc) {
  if (!sc.accept('(')) throw ConfigError("expression: expected '(' after cos");
  if (!(sc.accept('2') && sc.accept('*') && sc.accept_word("pi") && sc.accept('*')))
    throw ConfigError("expression: cosine argument must be 2*pi*[k*]x");
  int mode = 1;
  size_t save_pos = sc.pos;
  if (auto k = sc.number()) {
    if (sc.accept('*')) {
      double kk = *k;
      if (kk < 1.0 || kk != std::floor(kk))
        throw ConfigError("expression: cosine mode k must be a positive integer");
      mode = static_cast<int>(kk);
    } else {
      sc.pos = save_pos;  // the number was not a mode factor
    }
  }
  if (!sc.accept('x')) throw ConfigError("expression: cosine argument must end with x");
  if (!sc.accept(')')) throw ConfigError("expression: expected ')'");
  return mode;
}

std::vector<double> load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("expression: cannot open table file " + path);
  std::vector<double> samples;
  double v;
  while (in >> v) samples.push_back(v);
  if (samples.size() < 2) throw ConfigError("expression: table needs at least 2 samples");
  return samples;
}

// --- strict key checking -----------------------------------------------------

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& where, std::vector<std::string>* offending) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) offending->push_back(where + "." + it.key());
}

double get_num(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("config: missing key " + where + "." + key);
  if (!obj[key].is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
  return obj[key].get<double>();
}

double get_num_or(const nlohmann::json& obj, const std::string& key, double fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
  return obj[key].get<double>();
}

int get_int_or(const nlohmann::json& obj, const std::string& key, int fallback,
               const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError("config: " + where + "." + key + " must be an integer");
  return obj[key].get<int>();
}

}  // namespace

Potential parse_expression(const std::string& text, double length) {
  if (text.rfind("table:", 0) == 0)
    return Potential::tabulated(load_table(text.substr(6)), length);

  Scanner sc{text};
  double offset = 0.0, amplitude = 0.0;
  int mode = 1;
  bool have_cos = false;

  // leading term: number, cos, or number*cos
  double sign = 1.0;
  if (sc.accept('-')) sign = -1.0;
  else sc.accept('+');
  if (sc.accept_word("cos")) {
    mode = parse_cos(sc);
    amplitude = sign;
    have_cos = true;
  } else if (auto v = sc.number()) {
    if (sc.accept('*')) {
      if (!sc.accept_word("cos")) throw ConfigError("expression: expected cos after '*'");
      mode = parse_cos(sc);
      amplitude = sign * *v;
      have_cos = true;
    } else {
      offset = sign * *v;
    }
  } else {
    throw ConfigError("expression: cannot parse '" + text + "'");
  }

  // optional second term
  if (!sc.eof()) {
    if (have_cos) throw ConfigError("expression: constant must come before the cosine term");
    double s2 = 1.0;
    if (sc.accept('-')) s2 = -1.0;
    else if (!sc.accept('+')) throw ConfigError("expression: expected '+' or '-'");
    if (sc.accept_word("cos")) {
      mode = parse_cos(sc);
      amplitude = s2;
    } else if (auto v = sc.number()) {
      if (!sc.accept('*') || !sc.accept_word("cos"))
        throw ConfigError("expression: second term must be [B*]cos(2*pi*k*x)");
      mode = parse_cos(sc);
      amplitude = s2 * *v;
    } else {
      throw ConfigError("expression: cannot parse second term of '" + text + "'");
    }
  }
  if (!sc.eof()) throw ConfigError("expression: trailing characters in '" + text + "'");
  return Potential::cosine(offset, amplitude, mode);
}

RunConfig RunConfig::parse(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  RunConfig cfg;
  cfg.raw = doc;
  std::vector<std::string> offending;
  check_keys(doc,
             {"model", "grid", "time", "scheme", "initial", "pinned", "shoot", "critical",
              "longtime", "barrier", "output"},
             "$", &offending);

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    check_keys(m, {"kinetic_coefficient", "u_coupling", "potential", "shift"}, "model",
               &offending);
    cfg.has_model = true;
    cfg.kinetic_coefficient = get_num(m, "kinetic_coefficient", "model");
    cfg.u_coupling = get_num(m, "u_coupling", "model");
    if (!m.contains("potential") || !m["potential"].is_string())
      throw ConfigError("config: model.potential must be a string expression");
    cfg.potential_text = m["potential"].get<std::string>();
    cfg.shift = get_num_or(m, "shift", 0.0, "model");
    if (!(cfg.kinetic_coefficient > 0.0))
      throw ConfigError("config: model.kinetic_coefficient must be > 0");
  }

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    check_keys(g, {"n", "length"}, "grid", &offending);
    cfg.has_grid = true;
    cfg.grid_n = get_int_or(g, "n", 0, "grid");
    cfg.grid_length = get_num_or(g, "length", 1.0, "grid");
    if (cfg.grid_n <= 0) throw ConfigError("config: grid.n must be a positive integer");
    if (!(cfg.grid_length > 0.0)) throw ConfigError("config: grid.length must be > 0");
  }

  if (doc.contains("time")) {
    const auto& t = doc["time"];
    check_keys(t, {"dt", "T"}, "time", &offending);
    cfg.has_time = true;
    cfg.dt = get_num(t, "dt", "time");
    cfg.horizon = get_num(t, "T", "time");
    if (!(cfg.dt > 0.0)) throw ConfigError("config: time.dt must be > 0");
    if (!(cfg.horizon > 0.0)) throw ConfigError("config: time.T must be > 0");
    double ratio = cfg.horizon / cfg.dt;
    cfg.steps = static_cast<int>(std::llround(ratio));
    if (cfg.steps < 1 || std::fabs(ratio - cfg.steps) > 1e-8 * std::max(1.0, ratio))
      throw ConfigError("config: time.T must be an integer multiple of time.dt");
  }

  if (doc.contains("scheme")) {
    const auto& s = doc["scheme"];
    check_keys(s, {"window_radius", "u_rule", "picard"}, "scheme", &offending);
    cfg.scheme.window_radius = get_int_or(s, "window_radius", 0, "scheme");
    if (cfg.scheme.window_radius < 0)
      throw ConfigError("config: scheme.window_radius must be >= 0");
    if (s.contains("u_rule")) {
      std::string rule = s["u_rule"].get<std::string>();
      if (rule == "explicit")
        cfg.scheme.u_rule = URule::explicit_departure;
      else if (rule == "midpoint")
        cfg.scheme.u_rule = URule::midpoint;
      else
        throw ConfigError("config: scheme.u_rule must be 'explicit' or 'midpoint'");
    }
    if (s.contains("picard")) {
      const auto& p = s["picard"];
      check_keys(p, {"tol", "max_iter"}, "scheme.picard", &offending);
      cfg.picard_tol = get_num_or(p, "tol", 1e-10, "scheme.picard");
      cfg.picard_max_iter = get_int_or(p, "max_iter", 200, "scheme.picard");
      if (!(cfg.picard_tol > 0.0)) throw ConfigError("config: scheme.picard.tol must be > 0");
      if (cfg.picard_max_iter < 1)
        throw ConfigError("config: scheme.picard.max_iter must be >= 1");
    }
  }

  if (doc.contains("initial")) {
    const auto& s = doc["initial"];
    check_keys(s, {"phi"}, "initial", &offending);
    if (!s.contains("phi") || !s["phi"].is_string())
      throw ConfigError("config: initial.phi must be a string expression");
    cfg.has_initial = true;
    cfg.phi_text = s["phi"].get<std::string>();
  }

  if (doc.contains("pinned")) {
    const auto& s = doc["pinned"];
    check_keys(s, {"x0", "u0"}, "pinned", &offending);
    cfg.has_pinned = true;
    cfg.pinned.x0 = get_num(s, "x0", "pinned");
    cfg.pinned.u0 = get_num(s, "u0", "pinned");
  }

  if (doc.contains("shoot")) {
    const auto& s = doc["shoot"];
    check_keys(s,
               {"x0", "u0", "target_x", "t", "p0_max", "n_samples", "refine_iters", "eps_hit",
                "m_max", "ode_steps"},
               "shoot", &offending);
    cfg.has_shoot = true;
    cfg.shoot.x0 = get_num_or(s, "x0", 0.0, "shoot");
    cfg.shoot.u0 = get_num_or(s, "u0", 0.0, "shoot");
    cfg.shoot.target_x = get_num(s, "target_x", "shoot");
    cfg.shoot.t = get_num(s, "t", "shoot");
    cfg.shoot.params.p0_max = get_num_or(s, "p0_max", 10.0, "shoot");
    cfg.shoot.params.n_samples = get_int_or(s, "n_samples", 512, "shoot");
    cfg.shoot.params.refine_iters = get_int_or(s, "refine_iters", 60, "shoot");
    cfg.shoot.params.eps_hit = get_num_or(s, "eps_hit", 1e-10, "shoot");
    cfg.shoot.params.m_max = get_int_or(s, "m_max", 3, "shoot");
    cfg.shoot.params.ode_steps = get_int_or(s, "ode_steps", 0, "shoot");
    if (!(cfg.shoot.t > 0.0)) throw ConfigError("config: shoot.t must be > 0");
    if (!(cfg.shoot.params.p0_max > 0.0)) throw ConfigError("config: shoot.p0_max must be > 0");
    if (cfg.shoot.params.n_samples < 64)
      throw ConfigError("config: shoot.n_samples must be >= 64");
    if (!(cfg.shoot.params.eps_hit > 0.0)) throw ConfigError("config: shoot.eps_hit must be > 0");
    if (cfg.shoot.params.m_max < 0) throw ConfigError("config: shoot.m_max must be >= 0");
  }

  if (doc.contains("critical")) {
    const auto& s = doc["critical"];
    check_keys(s, {"c_values", "c_lo", "c_hi", "horizon_T", "max_bisect", "drift_tol", "k_guard"},
               "critical", &offending);
    cfg.has_critical = true;
    if (s.contains("c_values")) {
      if (!s["c_values"].is_array())
        throw ConfigError("config: critical.c_values must be an array");
      for (const auto& v : s["c_values"]) cfg.critical.c_values.push_back(v.get<double>());
    }
    if (s.contains("c_lo")) cfg.critical.c_lo = get_num(s, "c_lo", "critical");
    if (s.contains("c_hi")) cfg.critical.c_hi = get_num(s, "c_hi", "critical");
    cfg.critical.horizon_T = get_num_or(s, "horizon_T", 50.0, "critical");
    cfg.critical.max_bisect = get_int_or(s, "max_bisect", 20, "critical");
    cfg.critical.drift.drift_tol = get_num_or(s, "drift_tol", 1e-3, "critical");
    cfg.critical.drift.sup_guard = get_num_or(s, "k_guard", 1e6, "critical");
    if (cfg.critical.horizon_T < 20.0)
      throw ConfigError("config: critical.horizon_T must be >= 20");
    if (cfg.critical.max_bisect < 1)
      throw ConfigError("config: critical.max_bisect must be >= 1");
    if (!(cfg.critical.drift.drift_tol > 0.0))
      throw ConfigError("config: critical.drift_tol must be > 0");
    if (!(cfg.critical.drift.sup_guard > 0.0))
      throw ConfigError("config: critical.k_guard must be > 0");
  }

  if (doc.contains("longtime")) {
    const auto& s = doc["longtime"];
    check_keys(s,
               {"horizon_T", "window_W", "stationary_tol", "max_steps", "aubry_tol",
                "gate_horizon"},
               "longtime", &offending);
    cfg.has_longtime = true;
    cfg.longtime.horizon_T = get_num_or(s, "horizon_T", 50.0, "longtime");
    cfg.longtime.window_W = get_num_or(s, "window_W", 10.0, "longtime");
    cfg.longtime.stationary_tol = get_num_or(s, "stationary_tol", 1e-6, "longtime");
    cfg.longtime.max_steps = get_int_or(s, "max_steps", 200000, "longtime");
    cfg.longtime.aubry_tol = get_num_or(s, "aubry_tol", 1e-2, "longtime");
    cfg.longtime.gate_horizon = get_num_or(s, "gate_horizon", 20.0, "longtime");
    if (!(cfg.longtime.window_W > 0.0))
      throw ConfigError("config: longtime.window_W must be > 0");
    if (cfg.longtime.horizon_T < 2.0 * cfg.longtime.window_W)
      throw ConfigError("config: longtime.horizon_T must be >= 2 * window_W");
    if (!(cfg.longtime.stationary_tol > 0.0))
      throw ConfigError("config: longtime.stationary_tol must be > 0");
    if (!(cfg.longtime.aubry_tol > 0.0))
      throw ConfigError("config: longtime.aubry_tol must be > 0");
    if (cfg.longtime.max_steps < 1) throw ConfigError("config: longtime.max_steps must be >= 1");
  }

  if (doc.contains("barrier")) {
    const auto& s = doc["barrier"];
    check_keys(s, {"x0", "u0"}, "barrier", &offending);
    cfg.has_barrier = true;
    cfg.barrier_src.x0 = get_num(s, "x0", "barrier");
    cfg.barrier_src.u0 = get_num(s, "u0", "barrier");
  }

  if (doc.contains("output")) {
    const auto& s = doc["output"];
    check_keys(s, {"directory", "formats", "stride"}, "output", &offending);
    if (s.contains("directory")) cfg.output.directory = s["directory"].get<std::string>();
    if (s.contains("formats")) {
      cfg.output.csv = cfg.output.json = false;
      for (const auto& f : s["formats"]) {
        std::string fmt = f.get<std::string>();
        if (fmt == "csv")
          cfg.output.csv = true;
        else if (fmt == "json")
          cfg.output.json = true;
        else
          throw ConfigError("config: output.formats entries must be 'csv' or 'json'");
      }
    }
    cfg.output.stride = get_int_or(s, "stride", 1, "output");
    if (cfg.output.stride < 1) throw ConfigError("config: output.stride must be >= 1");
  }

  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "config: unknown keys:";
    for (const auto& k : offending) msg << ' ' << k;
    throw ConfigError(msg.str());
  }

  // cross-section invariants
  if (cfg.has_model && cfg.has_time) {
    double lambda = std::fabs(cfg.u_coupling);
    if (lambda * cfg.dt > 0.5)
      throw ConfigError("config: stability constraint lambda*dt <= 0.5 violated");
  }
  if (cfg.has_grid && cfg.scheme.window_radius > cfg.grid_n / 2)
    throw ConfigError("config: scheme.window_radius must be <= n/2");

  // the drift/scheme threads get wired by the CLI after parsing
  cfg.longtime.dt = cfg.has_time ? cfg.dt : cfg.longtime.dt;
  cfg.longtime.drift = cfg.critical.drift;
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  return parse(doc);
}

HamiltonianModel RunConfig::model() const {
  require("model");
  return HamiltonianModel::quadratic(kinetic_coefficient, u_coupling,
                                     parse_expression(potential_text, grid_length), shift);
}

PeriodicGrid RunConfig::grid() const {
  require("grid");
  return PeriodicGrid(grid_n, grid_length);
}

TimeGrid RunConfig::tgrid() const {
  require("time");
  return TimeGrid(dt, steps);
}

ValueField RunConfig::phi_field() const {
  require("initial");
  PeriodicGrid g = grid();
  Potential expr = parse_expression(phi_text, grid_length);
  return make_field(g, [&](double x) { return expr(x); });
}

void RunConfig::require(const std::string& section) const {
  auto missing = [&](bool ok) {
    if (!ok) throw ConfigError("config: missing required section '" + section + "'");
  };
  if (section == "model") missing(has_model);
  else if (section == "grid") missing(has_grid);
  else if (section == "time") missing(has_time);
  else if (section == "initial") missing(has_initial);
  else if (section == "pinned") missing(has_pinned);
  else if (section == "shoot") missing(has_shoot);
  else if (section == "critical") missing(has_critical);
  else if (section == "longtime") missing(has_longtime);
  else if (section == "barrier") missing(has_barrier);
  else throw std::logic_error("unknown section name");
}

}  // namespace hjfund
