#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hjfund/config.hpp"
#include "hjfund/io.hpp"
#include "test_util.hpp"

using namespace hjfund;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json{{"model",
               {{"kinetic_coefficient", 1.0},
                {"u_coupling", 1.0},
                {"potential", "0.3*cos(2*pi*1*x)"},
                {"shift", 0.0}}},
              {"grid", {{"n", 64}, {"length", 1.0}}},
              {"time", {{"dt", 0.01}, {"T", 1.0}}},
              {"initial", {{"phi", "1"}}}};
}

std::string write_temp(const json& doc, const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "hjfund_test_cfg";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream out(p);
  out << doc.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

#ifdef HJFUND_CLI_PATH
int run_cli(const std::string& args) {
  std::string cmd = std::string(HJFUND_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}
#endif

}  // namespace

TEST_CASE("expression grammar accepts the documented shapes") {
  auto at = [](const Potential& p, double x) { return p(x); };
  CHECK(at(parse_expression("0", 1.0), 0.3) == doctest::Approx(0.0));
  CHECK(at(parse_expression("1.5", 1.0), 0.9) == doctest::Approx(1.5));
  CHECK(at(parse_expression("-2", 1.0), 0.0) == doctest::Approx(-2.0));
  CHECK(at(parse_expression("cos(2*pi*x)", 1.0), 0.0) == doctest::Approx(1.0));
  CHECK(at(parse_expression("1 + 0.3*cos(2*pi*1*x)", 1.0), 0.0) == doctest::Approx(1.3));
  CHECK(at(parse_expression("0.5+cos(2*pi*2*x)", 1.0), 0.25) == doctest::Approx(-0.5));
  CHECK(at(parse_expression("1 - 1*cos(2*pi*1*x)", 1.0), 0.5) == doctest::Approx(2.0));
  CHECK(at(parse_expression("-0.3*cos(2*pi*x)", 1.0), 0.0) == doctest::Approx(-0.3));
}

TEST_CASE("expression grammar rejects everything else") {
  CHECK_THROWS_AS(parse_expression("sin(2*pi*x)", 1.0), ConfigError);
  CHECK_THROWS_AS(parse_expression("1 + x", 1.0), ConfigError);
  CHECK_THROWS_AS(parse_expression("cos(3*pi*x)", 1.0), ConfigError);
  CHECK_THROWS_AS(parse_expression("cos(2*pi*0.5*x)", 1.0), ConfigError);
  CHECK_THROWS_AS(parse_expression("1 + 2", 1.0), ConfigError);
  CHECK_THROWS_AS(parse_expression("", 1.0), ConfigError);
  CHECK_THROWS_AS(parse_expression("1 + cos(2*pi*x) + 2", 1.0), ConfigError);
}

TEST_CASE("tabulated expressions load from disk") {
  fs::path dir = fs::temp_directory_path() / "hjfund_test_cfg";
  fs::create_directories(dir);
  fs::path table = dir / "pot.txt";
  {
    std::ofstream out(table);
    for (int i = 0; i < 16; ++i) out << std::cos(testutil::kTwoPi * i / 16.0) << "\n";
  }
  Potential p = parse_expression("table:" + table.string(), 1.0);
  CHECK(p.is_tabulated());
  CHECK(p(0.0) == doctest::Approx(1.0));
  CHECK(p(0.5) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(parse_expression("table:/nonexistent/file.txt", 1.0), ConfigError);
}

TEST_CASE("config parses and builds the run objects") {
  RunConfig cfg = RunConfig::parse(base_config());
  auto m = cfg.model();
  CHECK(m.u_coupling() == doctest::Approx(1.0));
  CHECK(m.lipschitz_u() == doctest::Approx(1.0));
  CHECK(cfg.grid().size() == 64);
  CHECK(cfg.tgrid().steps() == 100);
  auto phi = cfg.phi_field();
  for (int i = 0; i < phi.size(); ++i) CHECK(phi[i] == doctest::Approx(1.0));
}

TEST_CASE("unknown keys are a validation error listing their paths") {
  json doc = base_config();
  doc["model"]["spice"] = 1.0;
  doc["grid"]["m"] = 3;
  try {
    RunConfig::parse(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string what = e.what();
    CHECK(what.find("model.spice") != std::string::npos);
    CHECK(what.find("grid.m") != std::string::npos);
  }
}

TEST_CASE("config invariants") {
  json unstable = base_config();
  unstable["model"]["u_coupling"] = -60.0;  // lambda*dt = 0.6
  CHECK_THROWS_AS(RunConfig::parse(unstable), ConfigError);

  json wide = base_config();
  wide["scheme"] = {{"window_radius", 33}};
  CHECK_THROWS_AS(RunConfig::parse(wide), ConfigError);

  json ragged = base_config();
  ragged["time"]["T"] = 0.505;  // not a multiple of dt? 50.5 steps
  CHECK_THROWS_AS(RunConfig::parse(ragged), ConfigError);

  json badtol = base_config();
  badtol["scheme"] = {{"picard", {{"tol", -1.0}}}};
  CHECK_THROWS_AS(RunConfig::parse(badtol), ConfigError);

  json badfmt = base_config();
  badfmt["output"] = {{"formats", {"yaml"}}};
  CHECK_THROWS_AS(RunConfig::parse(badfmt), ConfigError);
}

TEST_CASE("scheme options parse both update rules") {
  json doc = base_config();
  doc["scheme"] = {{"window_radius", 4}, {"u_rule", "midpoint"}};
  RunConfig cfg = RunConfig::parse(doc);
  CHECK(cfg.scheme.u_rule == URule::midpoint);
  CHECK(cfg.scheme.window_radius == 4);
  doc["scheme"]["u_rule"] = "upwind";
  CHECK_THROWS_AS(RunConfig::parse(doc), ConfigError);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.0, 1.0, -2.5, 1e-12, 3.141592653589793, 1e12, 0.1}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv writers are deterministic") {
  PeriodicGrid g(8, 1.0);
  TimeGrid t(0.25, 2);
  SchemeOptions opts;
  opts.window_radius = 2;
  auto r = evolve(testutil::quadratic(0.5), testutil::random_smooth_field(g, 3), t, opts);
  fs::path dir = fs::temp_directory_path() / "hjfund_test_cfg";
  fs::create_directories(dir);
  write_field_csv((dir / "a.csv").string(), r.field);
  write_field_csv((dir / "b.csv").string(), r.field);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  std::string head = slurp(dir / "a.csv").substr(0, 10);
  CHECK(head == "t,x,value\n");
}

#ifdef HJFUND_CLI_PATH

TEST_CASE("cli: evolve writes artifacts and reruns byte-identically") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_evolve";
  fs::remove_all(dir);
  json doc = base_config();
  std::string cfg = write_temp(doc, "evolve.json");
  REQUIRE(run_cli("evolve --config " + cfg + " --out " + (dir / "run1").string()) == 0);
  REQUIRE(run_cli("evolve --config " + cfg + " --out " + (dir / "run2").string()) == 0);
  CHECK(fs::exists(dir / "run1" / "evolve_field.csv"));
  CHECK(fs::exists(dir / "run1" / "manifest.json"));
  CHECK(slurp(dir / "run1" / "evolve_field.csv") == slurp(dir / "run2" / "evolve_field.csv"));
  CHECK(slurp(dir / "run1" / "evolve_summary.json") ==
        slurp(dir / "run2" / "evolve_summary.json"));
  // manifests agree once the volatile block (timing, thread count) is dropped
  auto m1 = json::parse(slurp(dir / "run1" / "manifest.json"));
  auto m2 = json::parse(slurp(dir / "run2" / "manifest.json"));
  m1.erase("volatile");
  m2.erase("volatile");
  CHECK(m1 == m2);
}

TEST_CASE("cli: validation failures exit 2") {
  json doc = base_config();
  doc["mystery"] = 1;
  std::string cfg = write_temp(doc, "bad.json");
  CHECK(run_cli("evolve --config " + cfg) == 2);
  CHECK(run_cli("evolve --config /nonexistent.json") == 2);
  CHECK(run_cli("bogus-subcommand --config " + cfg) == 2);
  // missing section needed by the subcommand
  json no_pin = base_config();
  std::string cfg2 = write_temp(no_pin, "nopin.json");
  CHECK(run_cli("fundamental --config " + cfg2) == 2);
}

TEST_CASE("cli: numerical failures exit 3") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_num";
  json doc = base_config();
  doc["model"]["u_coupling"] = -1.0;  // divergent model
  doc["pinned"] = {{"x0", 0.0}, {"u0", 1.0}};
  doc["scheme"] = {{"picard", {{"tol", 1e-14}, {"max_iter", 1}}}};
  std::string cfg = write_temp(doc, "nonconv.json");
  CHECK(run_cli("picard --config " + cfg + " --out " + (dir / "p").string()) == 3);

  json div = base_config();
  div["model"]["u_coupling"] = -1.0;
  div["longtime"] = {{"horizon_T", 50.0}, {"window_W", 10.0}};
  std::string cfg2 = write_temp(div, "diverge.json");
  CHECK(run_cli("stationary --config " + cfg2 + " --out " + (dir / "s").string()) == 3);
}

TEST_CASE("cli: critical-value no-bracket is a report, not an error") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_crit";
  fs::remove_all(dir);
  json doc = base_config();
  doc["model"]["u_coupling"] = -1.0;
  doc["time"] = {{"dt", 0.01}, {"T", 1.0}};
  doc["critical"] = {{"c_values", {-2.0, 0.0, 2.0}},
                     {"c_lo", 0.0},
                     {"c_hi", 2.0},
                     {"horizon_T", 25.0},
                     {"max_bisect", 6}};
  std::string cfg = write_temp(doc, "crit.json");
  REQUIRE(run_cli("critical-value --config " + cfg + " --out " + dir.string()) == 0);
  auto rep = json::parse(slurp(dir / "critical_report.json"));
  CHECK(rep["no_bracket"] == true);
  CHECK(rep["c_star"].is_null());
  for (const auto& e : rep["results"]) CHECK(e["classification"] != "bounded");
}

TEST_CASE("cli: characteristics and min-char write their reports") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_char";
  fs::remove_all(dir);
  json doc = json{{"model",
                   {{"kinetic_coefficient", 1.0},
                    {"u_coupling", 0.0},
                    {"potential", "0"},
                    {"shift", 0.0}}},
                  {"grid", {{"n", 32}, {"length", 1.0}}},
                  {"initial", {{"phi", "0"}}},
                  {"shoot",
                   {{"x0", 0.0},
                    {"u0", 0.0},
                    {"target_x", 0.25},
                    {"t", 0.5},
                    {"p0_max", 3.0},
                    {"n_samples", 64},
                    {"m_max", 1}}}};
  std::string cfg = write_temp(doc, "char.json");
  REQUIRE(run_cli("characteristics --config " + cfg + " --out " + (dir / "shoot").string()) == 0);
  CHECK(fs::exists(dir / "shoot" / "shoot_report.json"));
  CHECK(fs::exists(dir / "shoot" / "trajectory.csv"));
  auto hits = json::parse(slurp(dir / "shoot" / "shoot_report.json"));
  REQUIRE(!hits.empty());
  for (const auto& h : hits) {
    CHECK(h.contains("p0"));
    CHECK(h.contains("winding"));
    CHECK(h.contains("u_final"));
    CHECK(h.contains("hit_error"));
  }
  std::string head = slurp(dir / "shoot" / "trajectory.csv").substr(0, 8);
  CHECK(head == "t,x,u,p\n");

  REQUIRE(run_cli("min-char --config " + cfg + " --out " + (dir / "mc").string()) == 0);
  auto mc = json::parse(slurp(dir / "mc" / "min_char.json"));
  CHECK(mc["found"] == true);
  CHECK(std::fabs(mc["value"].get<double>()) <= 1e-8);
}

TEST_CASE("cli: fundamental and picard agree through the file outputs") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_fund";
  fs::remove_all(dir);
  json doc = json{{"model",
                   {{"kinetic_coefficient", 1.0},
                    {"u_coupling", -1.0},
                    {"potential", "0"},
                    {"shift", 0.0}}},
                  {"grid", {{"n", 32}, {"length", 1.0}}},
                  {"time", {{"dt", 0.02}, {"T", 0.5}}},
                  {"scheme", {{"window_radius", 4}}},
                  {"pinned", {{"x0", 0.0}, {"u0", 1.0}}}};
  std::string cfg = write_temp(doc, "fund.json");
  REQUIRE(run_cli("fundamental --config " + cfg + " --out " + (dir / "f").string()) == 0);
  REQUIRE(run_cli("picard --config " + cfg + " --out " + (dir / "p").string()) == 0);
  auto f = json::parse(slurp(dir / "f" / "fundamental_summary.json"));
  auto p = json::parse(slurp(dir / "p" / "picard_trace.json"));
  CHECK(p["converged"] == true);
  // the pinned value grows like e^t up to the explicit-rule bias
  double at_source = f["final_slice"][0].get<double>();
  CHECK(at_source == doctest::Approx(std::exp(0.5)).epsilon(2e-2));
  CHECK(fs::exists(dir / "f" / "fundamental_field.csv"));
  CHECK(fs::exists(dir / "p" / "picard_field.csv"));
}

TEST_CASE("cli: aubry and barrier produce their reports on a small instance") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_aubry";
  fs::remove_all(dir);
  json doc = json{{"model",
                   {{"kinetic_coefficient", 1.0},
                    {"u_coupling", 1.0},
                    {"potential", "0.3*cos(2*pi*1*x)"},
                    {"shift", 0.0}}},
                  {"grid", {{"n", 32}, {"length", 1.0}}},
                  {"time", {{"dt", 0.02}, {"T", 1.0}}},
                  {"initial", {{"phi", "0"}}},
                  {"longtime", {{"horizon_T", 30.0}, {"window_W", 6.0}}},
                  {"barrier", {{"x0", 0.25}, {"u0", 0.0}}}};
  std::string cfg = write_temp(doc, "aubry.json");
  REQUIRE(run_cli("aubry --config " + cfg + " --out " + (dir / "a").string()) == 0);
  auto rep = json::parse(slurp(dir / "a" / "aubry.json"));
  CHECK(rep["aubry_nodes"].size() > 0);
  CHECK(rep["flagged_empty"] == false);
  CHECK(rep["representation_deviation"].get<double>() <= 5e-2);
  CHECK(fs::exists(dir / "a" / "barrier_diag.csv"));

  REQUIRE(run_cli("barrier --config " + cfg + " --out " + (dir / "b").string()) == 0);
  auto bar = json::parse(slurp(dir / "b" / "barrier.json"));
  CHECK(bar["diverged"] == false);
  CHECK(fs::exists(dir / "b" / "barrier_field.csv"));
}

TEST_CASE("cli: critical-value bisection on the mechanical model") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_crit2";
  fs::remove_all(dir);
  json doc = json{{"model",
                   {{"kinetic_coefficient", 1.0},
                    {"u_coupling", 0.0},
                    {"potential", "cos(2*pi*x)"},
                    {"shift", 0.0}}},
                  {"grid", {{"n", 64}, {"length", 1.0}}},
                  {"time", {{"dt", 0.01}, {"T", 1.0}}},
                  {"initial", {{"phi", "0"}}},
                  {"critical",
                   {{"c_lo", 0.0}, {"c_hi", 2.0}, {"horizon_T", 30.0}, {"max_bisect", 8}}}};
  std::string cfg = write_temp(doc, "crit2.json");
  REQUIRE(run_cli("critical-value --config " + cfg + " --out " + dir.string()) == 0);
  auto bracket = json::parse(slurp(dir / "critical_bracket.json"));
  CHECK(bracket["status"] == "ok");
  CHECK(std::fabs(bracket["c_star"].get<double>() - 1.0) <= 0.1);
}

TEST_CASE("cli: oracle-check passes its battery") {
  fs::path dir = fs::temp_directory_path() / "hjfund_cli_oracle";
  fs::remove_all(dir);
  json doc = json{{"output", {{"directory", dir.string()}}}};
  std::string cfg = write_temp(doc, "oracle.json");
  REQUIRE(run_cli("oracle-check --config " + cfg) == 0);
  auto rep = json::parse(slurp(dir / "oracle_check.json"));
  CHECK(rep["all_pass"] == true);
  for (const auto& e : rep["results"]) CHECK(e["pass"] == true);
}

#endif  // HJFUND_CLI_PATH
