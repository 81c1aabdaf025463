// Command-line driver: loads a strict JSON config, runs one operation of the
// library, and writes plot-ready CSV/JSON artifacts plus a manifest.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hjfund/characteristics.hpp"
#include "hjfund/config.hpp"
#include "hjfund/critical.hpp"
#include "hjfund/io.hpp"
#include "hjfund/longtime.hpp"
#include "hjfund/oracle.hpp"
#include "hjfund/propagator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hjfund;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct RunContext {
  RunConfig cfg;
  std::string out_dir;
  int threads = 1;
  bool verbose = false;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (fs::path(out_dir) / name).string();
  }

  void note(const std::string& msg) {
    if (verbose) std::cerr << "hjfund: " << msg << "\n";
  }

  void warn(const std::string& msg) { warnings.push_back(msg); }
};

void collect_warnings(RunContext& ctx, const EvolveWarnings& w) {
  if (w.velocity_cap_binding)
    ctx.warn("velocity cap binding: some minimizers landed on the window edge");
  if (w.disconnected_domain)
    ctx.warn("disconnected domain: nodes unreachable past the reachability horizon");
}

void write_manifest(RunContext& ctx, const std::string& subcommand, double elapsed_ms) {
  json m{{"tool", "hjfund"},
         {"version", kVersion},
         {"subcommand", subcommand},
         {"config", ctx.cfg.raw},
         {"outputs", ctx.outputs},
         {"warnings", ctx.warnings},
         {"volatile", {{"elapsed_ms", elapsed_ms}, {"threads", ctx.threads}}}};
  write_json((fs::path(ctx.out_dir) / "manifest.json").string(), m);
}

SchemeOptions scheme_of(RunContext& ctx) {
  SchemeOptions s = ctx.cfg.scheme;
  s.threads = ctx.threads;
  return s;
}

int run_evolve(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto phi = ctx.cfg.phi_field();
  auto tg = ctx.cfg.tgrid();
  auto res = evolve(model, phi, tg, scheme_of(ctx));
  collect_warnings(ctx, res.warnings);
  if (ctx.cfg.output.csv)
    write_field_csv(ctx.path("evolve_field.csv"), res.field, ctx.cfg.output.stride);
  if (ctx.cfg.output.json) {
    json j{{"window_radius", res.window_radius},
           {"final_slice", res.field.slice(tg.steps()).values}};
    write_json(ctx.path("evolve_summary.json"), j);
  }
  return 0;
}

int run_fundamental(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto grid = ctx.cfg.grid();
  auto tg = ctx.cfg.tgrid();
  ctx.cfg.require("pinned");
  SchemeOptions opts = scheme_of(ctx);
  if (opts.window_radius <= 0) {
    opts.window_radius = default_window_radius(grid, tg.dt(), 2.0);
    ctx.note("pinned run: window radius defaulted to " + std::to_string(opts.window_radius));
  }
  int node = grid.nearest_node(ctx.cfg.pinned.x0);
  auto res = fundamental_solution(model, grid, node, ctx.cfg.pinned.u0, tg, opts);
  collect_warnings(ctx, res.warnings);
  if (ctx.cfg.output.csv)
    write_field_csv(ctx.path("fundamental_field.csv"), res.field, ctx.cfg.output.stride);
  if (ctx.cfg.output.json) {
    json j{{"x0_node", node},
           {"u0", ctx.cfg.pinned.u0},
           {"window_radius", opts.window_radius},
           {"final_slice", res.field.slice(tg.steps()).values}};
    write_json(ctx.path("fundamental_summary.json"), j);
  }
  return 0;
}

int run_picard(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto grid = ctx.cfg.grid();
  auto tg = ctx.cfg.tgrid();
  ctx.cfg.require("pinned");
  SchemeOptions opts = scheme_of(ctx);
  if (opts.window_radius <= 0) opts.window_radius = default_window_radius(grid, tg.dt(), 2.0);
  int node = grid.nearest_node(ctx.cfg.pinned.x0);
  auto res = picard_solve(model, grid, node, ctx.cfg.pinned.u0, tg, opts, ctx.cfg.picard_tol,
                          ctx.cfg.picard_max_iter);
  collect_warnings(ctx, res.warnings);
  if (ctx.cfg.output.csv)
    write_field_csv(ctx.path("picard_field.csv"), res.field, ctx.cfg.output.stride);
  json j{{"gaps", res.trace.gaps},
         {"converged", res.trace.converged},
         {"iterations", res.trace.iterations},
         {"tol", ctx.cfg.picard_tol}};
  write_json(ctx.path("picard_trace.json"), j);
  if (!res.trace.converged) {
    ctx.warn("picard iteration did not reach tolerance");
    return kExitNumerical;
  }
  return 0;
}

int run_characteristics(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto grid = ctx.cfg.grid();
  ctx.cfg.require("shoot");
  ShootParams params = ctx.cfg.shoot.params;
  params.threads = ctx.threads;
  auto hits = shoot(model, ctx.cfg.shoot.x0, ctx.cfg.shoot.u0, ctx.cfg.shoot.target_x,
                    ctx.cfg.shoot.t, grid, params);
  if (ctx.cfg.output.json) write_json(ctx.path("shoot_report.json"), shoot_report_json(hits));
  if (!hits.empty() && ctx.cfg.output.csv) {
    int steps = params.ode_steps > 0
                    ? params.ode_steps
                    : std::max(64, static_cast<int>(std::ceil(128.0 * ctx.cfg.shoot.t)));
    auto traj = integrate(model, {ctx.cfg.shoot.x0, ctx.cfg.shoot.u0, hits.front().p0},
                          ctx.cfg.shoot.t, steps);
    write_trajectory_csv(ctx.path("trajectory.csv"), traj);
  }
  if (hits.empty()) ctx.warn("no characteristics hit the target within the momentum window");
  return 0;
}

int run_min_char(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto phi = ctx.cfg.phi_field();
  ctx.cfg.require("shoot");
  ShootParams params = ctx.cfg.shoot.params;
  params.threads = ctx.threads;
  auto res = min_over_characteristics(model, phi, ctx.cfg.shoot.target_x, ctx.cfg.shoot.t, params);
  json j{{"found", res.found}};
  if (res.found) {
    j["value"] = res.value;
    j["source_node"] = res.source_node;
    j["p0"] = res.best.p0;
    j["winding"] = res.best.winding;
  }
  write_json(ctx.path("min_char.json"), j);
  if (!res.found) {
    ctx.warn("no characteristic found for any source node");
    return kExitNumerical;
  }
  return 0;
}

int run_critical(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto phi = ctx.cfg.phi_field();
  ctx.cfg.require("critical");
  ctx.cfg.require("time");
  DriftOptions drift = ctx.cfg.critical.drift;
  drift.scheme = scheme_of(ctx);
  CriticalValueReport report;
  if (!ctx.cfg.critical.c_values.empty())
    report = classify_shifts(model, phi, ctx.cfg.critical.c_values, ctx.cfg.critical.horizon_T,
                             ctx.cfg.dt, drift);
  if (ctx.cfg.critical.c_lo && ctx.cfg.critical.c_hi) {
    auto bracket = critical_search(model, phi, *ctx.cfg.critical.c_lo, *ctx.cfg.critical.c_hi,
                                   ctx.cfg.critical.horizon_T, ctx.cfg.dt,
                                   ctx.cfg.critical.max_bisect, drift);
    report.no_bracket = bracket.status == BracketResult::Status::no_bracket;
    report.c_star = bracket.c_star;
    write_json(ctx.path("critical_bracket.json"), bracket_report_json(bracket));
  }
  write_json(ctx.path("critical_report.json"), critical_report_json(report));
  return 0;
}

LongtimeOptions longtime_of(RunContext& ctx) {
  LongtimeOptions o = ctx.cfg.longtime;
  o.scheme = scheme_of(ctx);
  o.drift.scheme = o.scheme;
  if (ctx.cfg.has_time) o.dt = ctx.cfg.dt;
  return o;
}

int run_stationary(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto phi = ctx.cfg.phi_field();
  auto res = stationary_solve(model, phi, longtime_of(ctx));
  write_json(ctx.path("stationary.json"), stationary_report_json(res));
  if (ctx.cfg.output.csv)
    write_value_field_csv(ctx.path("stationary_field.csv"), res.u_star, 0.0);
  if (res.diverged) {
    ctx.warn("model classified divergent; no stationary solution");
    return kExitNumerical;
  }
  if (!res.converged) {
    ctx.warn("stationary iteration hit max_steps before tolerance");
    return kExitNumerical;
  }
  return 0;
}

int run_aubry(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto phi = ctx.cfg.phi_field();
  LongtimeOptions o = longtime_of(ctx);
  auto st = stationary_solve(model, phi, o);
  if (st.diverged) {
    write_json(ctx.path("aubry.json"), json{{"diverged", true}});
    ctx.warn("model classified divergent; no Aubry set");
    return kExitNumerical;
  }
  auto rep = aubry_set(model, st.u_star, o);
  json j = aubry_report_json(rep, st.u_star);
  if (!rep.flagged_empty) j["representation_deviation"] = representation_check(st.u_star, rep);
  write_json(ctx.path("aubry.json"), j);
  if (ctx.cfg.output.csv) {
    write_value_field_csv(ctx.path("stationary_field.csv"), st.u_star, 0.0);
    write_value_field_csv(ctx.path("barrier_diag.csv"),
                          ValueField(st.u_star.grid, rep.barrier_diag), 0.0);
  }
  if (rep.flagged_empty) {
    ctx.warn("Aubry set empty after tolerance escalation");
    return kExitNumerical;
  }
  return 0;
}

int run_barrier(RunContext& ctx) {
  auto model = ctx.cfg.model();
  auto grid = ctx.cfg.grid();
  ctx.cfg.require("barrier");
  LongtimeOptions o = longtime_of(ctx);
  int node = grid.nearest_node(ctx.cfg.barrier_src.x0);
  auto res = barrier(model, grid, node, ctx.cfg.barrier_src.u0, o);
  json j{{"x0_node", node}, {"u0", ctx.cfg.barrier_src.u0}, {"diverged", res.diverged}};
  if (!res.diverged) j["oscillation"] = res.oscillation;
  write_json(ctx.path("barrier.json"), j);
  if (!res.diverged && ctx.cfg.output.csv)
    write_value_field_csv(ctx.path("barrier_field.csv"), res.field, 0.0);
  if (res.diverged) {
    ctx.warn("model classified divergent; no barrier");
    return kExitNumerical;
  }
  return 0;
}

int run_oracle_check(RunContext& ctx) {
  json results = json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, double delta, double tol) {
    bool pass = delta <= tol;
    all_pass = all_pass && pass;
    results.push_back({{"name", name}, {"delta", delta}, {"tol", tol}, {"pass", pass}});
    ctx.note(name + (pass ? ": pass" : ": FAIL"));
  };

  // exhaustive enumeration against the dynamic program
  {
    PeriodicGrid g(8, 1.0);
    TimeGrid t(0.05, 4);
    SchemeOptions opts;
    opts.window_radius = 2;
    for (double beta : {0.0, -1.0, 1.0}) {
      auto m = HamiltonianModel::quadratic(1.0, beta, Potential::constant(0.0), 0.0);
      auto dp = fundamental_solution(m, g, 0, 1.0, t, opts);
      double worst = 0.0;
      for (int target = 0; target < g.size(); ++target) {
        double bf = brute_force_value(m, g, 0, 1.0, target, t.steps(), t.dt(), 2);
        worst = std::max(worst, std::fabs(bf - dp.field.value(target, t.steps())));
      }
      record("brute_force_vs_dp(beta=" + format_double(beta) + ")", worst, 1e-12);
    }
  }
  // scalar ODE against evolve on constant data
  {
    PeriodicGrid g(32, 1.0);
    SchemeOptions opts;
    opts.window_radius = 2;
    auto up = HamiltonianModel::quadratic(1.0, 1.0, Potential::constant(0.0), 0.0);
    TimeGrid t1(1e-3, 693);
    auto r1 = evolve(up, constant_field(g, 1.0), t1, opts);
    record("constant_data_ode(beta=+1)",
           std::fabs(r1.field.value(0, t1.steps()) - constant_data_ode(up, 1.0, t1.horizon())),
           2e-3);
    auto down = HamiltonianModel::quadratic(1.0, -1.0, Potential::constant(0.0), 0.0);
    TimeGrid t2(1e-3, 1000);
    auto r2 = evolve(down, constant_field(g, 1.0), t2, opts);
    record("constant_data_ode(beta=-1)",
           std::fabs(r2.field.value(0, t2.steps()) - constant_data_ode(down, 1.0, t2.horizon())),
           5e-3);
  }
  // dense Hopf-Lax search against evolve for the kinetic model
  {
    PeriodicGrid g(64, 1.0);
    TimeGrid t(0.025, 20);
    SchemeOptions opts;
    auto m = HamiltonianModel::quadratic(1.0, 0.0, Potential::constant(0.0), 0.0);
    auto phi_fn = [](double x) { return 1.0 - std::cos(2 * M_PI * x); };
    auto r = evolve(m, make_field(g, phi_fn), t, opts);
    double sup = 0.0;
    for (int i = 0; i < g.size(); ++i)
      sup = std::max(sup, std::fabs(r.field.value(i, t.steps()) -
                                    hopf_lax(m, phi_fn, g.node(i), t.horizon(), g, 640)));
    record("hopf_lax_vs_evolve", sup, 5e-2);
  }

  write_json(ctx.path("oracle_check.json"), json{{"results", results}, {"all_pass", all_pass}});
  return all_pass ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fundamental solutions and solution semigroups of evolutionary "
               "Hamilton-Jacobi equations on the flat 1-D torus"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  int threads = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "path to the JSON run configuration")->required();
  app.add_option("--threads", threads, "worker count for data-parallel sections")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_override, "output directory (overrides output.directory)");
  app.add_flag("--verbose", verbose, "progress notes on stderr");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(RunContext&);
  };
  const Sub subs[] = {
      {"evolve", "propagate initial data with the solution semigroup", run_evolve},
      {"fundamental", "pinned fundamental solution over the space-time grid", run_fundamental},
      {"picard", "fundamental solution by whole-field fixed-point iteration", run_picard},
      {"characteristics", "shoot the contact characteristic system at a target",
       run_characteristics},
      {"min-char", "minimum over characteristics from grid sources", run_min_char},
      {"critical-value", "drift classification over shifts and bisection search", run_critical},
      {"stationary", "discrete weak KAM fixed point of the semigroup", run_stationary},
      {"aubry", "barrier diagonal, projected Aubry set, representation check", run_aubry},
      {"barrier", "long-time barrier slice from one source", run_barrier},
      {"oracle-check", "built-in oracle battery with pass/fail deltas", run_oracle_check},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return std::string(e.get_name()) == "CallForHelp" ? 0 : kExitValidation;
  }

  auto t0 = std::chrono::steady_clock::now();
  std::string sub_name;
  int rc = 0;
  try {
    RunContext ctx{RunConfig::load(config_path), ".", threads, verbose, {}, {}};
    ctx.out_dir = out_override.empty() ? ctx.cfg.output.directory : out_override;
    fs::create_directories(ctx.out_dir);
    for (const auto& s : subs) {
      if (app.got_subcommand(s.name)) {
        sub_name = s.name;
        ctx.note("running " + sub_name);
        rc = s.fn(ctx);
        break;
      }
    }
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(ctx, sub_name, ms);
  } catch (const ConfigError& e) {
    std::cerr << "hjfund: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hjfund: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "hjfund: " << e.what() << "\n";
    return kExitNumerical;
  }
  return rc;
}
