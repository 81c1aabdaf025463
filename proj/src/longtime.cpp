#include "hjfund/longtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjfund/parallel.hpp"

namespace hjfund {

namespace {

int window_start_step(const LongtimeOptions& o) {
  int steps = static_cast<int>(std::llround(o.horizon_T / o.dt));
  int wsteps = static_cast<int>(std::llround(o.window_W / o.dt));
  return std::max(0, steps - wsteps);
}

}  // namespace

GateReport longtime_gate(const HamiltonianModel& model, const ValueField& phi,
                         const LongtimeOptions& opts) {
  GateReport gate;
  if (!opts.check_bounded) return gate;
  // Strict monotonicity in u makes the semigroup a contraction; boundedness
  // needs no probe run there.
  if (model.is_quadratic() && model.u_coupling() > 0.0) return gate;
  DriftOptions d = opts.drift;
  d.scheme = opts.scheme;
  gate.drift = classify_drift(model, phi, std::max(20.0, opts.gate_horizon), opts.dt, d);
  gate.passed = gate.drift.classification == DriftClass::bounded;
  return gate;
}

LiminfResult liminf_field(const HamiltonianModel& model, const ValueField& phi,
                          const LongtimeOptions& opts) {
  if (opts.horizon_T < 2.0 * opts.window_W)
    throw std::invalid_argument("liminf_field: horizon_T must be >= 2 * window_W");
  GateReport gate = longtime_gate(model, phi, opts);
  if (!gate.passed)
    return {constant_field(phi.grid, 0.0), {}, true, gate.drift};

  int steps = static_cast<int>(std::llround(opts.horizon_T / opts.dt));
  StreamResult s = evolve_stream(model, phi, opts.dt, steps, opts.scheme, window_start_step(opts),
                                 opts.drift.sup_guard);
  if (s.overflow_step >= 0)
    return {constant_field(phi.grid, 0.0), {}, true, gate.drift};
  std::vector<double> osc(phi.size());
  for (int i = 0; i < phi.size(); ++i) osc[i] = s.window_max[i] - s.window_min[i];
  return {ValueField(phi.grid, s.window_min), std::move(osc), false, gate.drift};
}

StationaryResult stationary_solve(const HamiltonianModel& model, const ValueField& phi_init,
                                  const LongtimeOptions& opts) {
  const bool contracting = model.is_quadratic() && model.u_coupling() > 0.0;
  if (!contracting) {
    LiminfResult lim = liminf_field(model, phi_init, opts);
    StationaryResult res{lim.field, 0.0, 0, StationaryMode::liminf_window, !lim.diverged,
                         lim.diverged};
    if (!lim.diverged) {
      StepOutput s = step(model, res.u_star, opts.dt, opts.scheme);
      res.fixed_point_residual = sup_distance(s.field, res.u_star);
    }
    return res;
  }

  ValueField cur = phi_init;
  double gap_tol = opts.stationary_tol * opts.dt;
  StationaryResult res{cur, 0.0, 0, StationaryMode::fixed_point_iteration, false, false};
  for (int k = 0; k < opts.max_steps; ++k) {
    StepOutput s = step(model, cur, opts.dt, opts.scheme);
    double gap = sup_distance(s.field, cur);
    cur = std::move(s.field);
    res.iterations = k + 1;
    if (gap <= gap_tol) {
      res.converged = true;
      break;
    }
  }
  res.u_star = cur;
  StepOutput fin = step(model, res.u_star, opts.dt, opts.scheme);
  res.fixed_point_residual = sup_distance(fin.field, res.u_star);
  return res;
}

BarrierResult barrier(const HamiltonianModel& model, const PeriodicGrid& grid, int x0_node,
                      double u0, const LongtimeOptions& opts) {
  GateReport gate = longtime_gate(model, pinned_field(grid, x0_node, u0), opts);
  if (!gate.passed) return {constant_field(grid, 0.0), {}, true};
  int steps = static_cast<int>(std::llround(opts.horizon_T / opts.dt));
  StreamResult s = evolve_stream(model, pinned_field(grid, x0_node, u0), opts.dt, steps,
                                 opts.scheme, window_start_step(opts), opts.drift.sup_guard);
  if (s.overflow_step >= 0) return {constant_field(grid, 0.0), {}, true};
  const int n = grid.size();
  std::vector<double> b(n), osc(n);
  for (int i = 0; i < n; ++i) {
    b[i] = s.window_min[i] - u0;
    osc[i] = s.window_max[i] - s.window_min[i];
  }
  return {ValueField(grid, std::move(b)), std::move(osc), false};
}

AubryReport aubry_set(const HamiltonianModel& model, const ValueField& u_star,
                      const LongtimeOptions& opts) {
  const int n = u_star.size();
  AubryReport rep;
  rep.barrier_diag.resize(n);
  rep.barrier_fields.assign(n, {});
  SchemeOptions inner = opts.scheme;
  inner.threads = 1;  // parallel across barrier sources instead
  int steps = static_cast<int>(std::llround(opts.horizon_T / opts.dt));
  int wstart = window_start_step(opts);
  std::vector<char> diverged(n, 0);
  parallel_for(n, opts.scheme.threads, [&](int y) {
    StreamResult s = evolve_stream(model, pinned_field(u_star.grid, y, u_star[y]), opts.dt, steps,
                                   inner, wstart, opts.drift.sup_guard);
    if (s.overflow_step >= 0) {
      diverged[y] = 1;
      return;
    }
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = s.window_min[i] - u_star[y];
    rep.barrier_diag[y] = b[y];
    rep.barrier_fields[y] = std::move(b);
  });
  for (int y = 0; y < n; ++y)
    if (diverged[y]) throw std::runtime_error("aubry_set: pinned run diverged; model not bounded");

  // tolerance escalation: double up to 8x before flagging an empty set
  for (int factor = 1; factor <= 8; factor *= 2) {
    rep.tol_used = opts.aubry_tol * factor;
    rep.escalated = factor > 1;
    rep.aubry_nodes.clear();
    for (int i = 0; i < n; ++i)
      if (std::fabs(rep.barrier_diag[i]) <= rep.tol_used) rep.aubry_nodes.push_back(i);
    if (!rep.aubry_nodes.empty()) break;
  }
  rep.flagged_empty = rep.aubry_nodes.empty();
  rep.u_on_aubry.clear();
  for (int i : rep.aubry_nodes) rep.u_on_aubry.push_back(u_star[i]);
  return rep;
}

double representation_check(const ValueField& u_star, const AubryReport& report) {
  if (report.aubry_nodes.empty())
    throw std::invalid_argument("representation_check: empty Aubry set");
  const int n = u_star.size();
  double dev = 0.0;
  for (int x = 0; x < n; ++x) {
    double best = std::numeric_limits<double>::infinity();
    for (int y : report.aubry_nodes)
      best = std::min(best, report.barrier_fields[y][x] + u_star[y]);
    dev = std::max(dev, std::fabs(best - u_star[x]));
  }
  return dev;
}

}  // namespace hjfund
