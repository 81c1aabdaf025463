#include "hjfund/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjfund/parallel.hpp"

namespace hjfund {

ValueField constant_field(const PeriodicGrid& grid, double value) {
  return ValueField(grid, std::vector<double>(grid.size(), value));
}

ValueField make_field(const PeriodicGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
  return ValueField(grid, std::move(v));
}

ValueField pinned_field(const PeriodicGrid& grid, int node, double u0) {
  std::vector<double> v(grid.size(), kBigValue);
  v[grid.wrap(node)] = u0;
  return ValueField(grid, std::move(v));
}

double sup_distance(const ValueField& a, const ValueField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double sup = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    if (is_big(a[i]) || is_big(b[i])) continue;
    sup = std::max(sup, std::fabs(a[i] - b[i]));
  }
  return sup;
}

double field_lipschitz(const ValueField& f) {
  const int n = f.size();
  double lip = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = f[i], b = f[(i + 1) % n];
    if (is_big(a) || is_big(b)) continue;
    lip = std::max(lip, std::fabs(b - a) / f.grid.spacing());
  }
  return lip;
}

int default_window_radius(const PeriodicGrid& grid, double dt, double lipschitz_bound) {
  double v_max = 4.0 * (lipschitz_bound + 1.0);
  int r = static_cast<int>(std::ceil(v_max * dt / grid.spacing()));
  r = std::max(r, 1);
  r = std::min(r, grid.size() / 2);
  return r;
}

namespace {

// Signed index offset from j to i, reduced into (-n/2, n/2] with the
// antipodal tie on the positive side.
int signed_offset(int n, int j, int i) {
  int m = (i - j) % n;
  if (m < 0) m += n;
  if (2 * m > n) m -= n;
  return m;
}

// Immutable per-step minimization context. Link displacements between grid
// nodes are signed index offsets times the spacing, so every (j, j+o) pair
// sees the same velocity and the brute-force oracle can reproduce the exact
// arithmetic through eval_L.
struct StepContext {
  const HamiltonianModel& model;
  const PeriodicGrid& grid;
  double dt;
  int radius;
  int off_lo;
  std::vector<double> vel;        // per offset slot
  std::vector<double> kin;        // v*v*(0.5/a) per offset slot (quadratic fast path)
  std::vector<double> node_x;     // node coordinate per node
  std::vector<double> node_v;     // potential per node (quadratic fast path)
  bool fast = false;

  StepContext(const HamiltonianModel& m, const PeriodicGrid& g, double step_dt, int r)
      : model(m), grid(g), dt(step_dt), radius(r) {
    if (r < 0 || 2 * r > g.size())
      throw std::invalid_argument("step: invalid window radius");
    if (!(step_dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (m.lipschitz_u() * step_dt > 0.5 + 1e-12)
      throw std::invalid_argument("step: stability constraint lambda*dt <= 0.5 violated");
    off_lo = (2 * r == g.size()) ? -r + 1 : -r;
    const int slots = r - off_lo + 1;
    vel.resize(slots);
    for (int s = 0; s < slots; ++s) vel[s] = (off_lo + s) * g.spacing() / step_dt;
    node_x.resize(g.size());
    for (int i = 0; i < g.size(); ++i) node_x[i] = g.node(i);
    fast = m.is_quadratic();
    if (fast) {
      kin.resize(slots);
      for (int s = 0; s < slots; ++s) kin[s] = vel[s] * vel[s] * (0.5 / m.kinetic_coefficient());
      node_v.resize(g.size());
      for (int i = 0; i < g.size(); ++i) node_v[i] = m.potential()(node_x[i]);
    }
  }

  int slots() const { return radius - off_lo + 1; }

  // Single-node explicit minimization. `in` supplies the propagated value,
  // `uarg` the value used in L's u slot (the same array outside Picard).
  // Returns the best candidate; argmin via best_j (-1 if all excluded).
  double minimize(const double* in, const double* uarg, int i, int* best_j,
                  bool* edge) const {
    const int n = grid.size();
    double best = kBigValue;
    int bj = -1;
    bool bj_edge = false;
    const double beta = model.u_coupling();
    const double c = model.shift();
    for (int s = 0; s < slots(); ++s) {
      int j = i + off_lo + s;
      j %= n;
      if (j < 0) j += n;
      double vin = in[j];
      double vu = uarg[j];
      if (is_big(vin) || is_big(vu)) continue;
      double cand;
      if (fast) {
        double lag = ((kin[s] - beta * vu) - node_v[j]) + c;
        cand = vin + dt * lag;
      } else {
        cand = vin + dt * model.lagrangian(node_x[j], vu, vel[s]);
      }
      if (bj < 0 || cand < best || (cand == best && j < bj)) {
        best = cand;
        bj = j;
        bj_edge = std::abs(off_lo + s) == radius;
      }
    }
    if (bj < 0) {
      *best_j = -1;
      return kBigValue;
    }
    *best_j = bj;
    if (edge && bj_edge && 2 * radius < n) *edge = true;
    return best;
  }

  // Midpoint refinement: L's u slot reads (in(j) + out_prev(i)) / 2, falling
  // back to the departure value while out_prev is still a sentinel.
  double minimize_midpoint(const double* in, double prev_out_i, int i, int* best_j) const {
    const int n = grid.size();
    double best = kBigValue;
    int bj = -1;
    for (int s = 0; s < slots(); ++s) {
      int j = i + off_lo + s;
      j %= n;
      if (j < 0) j += n;
      double vin = in[j];
      if (is_big(vin)) continue;
      double umid = is_big(prev_out_i) ? vin : 0.5 * (vin + prev_out_i);
      double cand = vin + dt * model.lagrangian(node_x[j], umid, vel[s]);
      if (bj < 0 || cand < best || (cand == best && j < bj)) {
        best = cand;
        bj = j;
      }
    }
    *best_j = bj;
    return bj < 0 ? kBigValue : best;
  }
};

int resolve_radius(const PeriodicGrid& grid, double dt, const SchemeOptions& opts,
                   const ValueField& data) {
  if (opts.window_radius > 0) {
    if (2 * opts.window_radius > grid.size())
      throw std::invalid_argument("window_radius exceeds n/2");
    return opts.window_radius;
  }
  return default_window_radius(grid, dt, field_lipschitz(data));
}

struct StepRaw {
  std::vector<double> out;
  std::vector<int> argmin;
  bool edge = false;
  bool excluded = false;
};

StepRaw step_raw(const StepContext& ctx, const std::vector<double>& in,
                 const std::vector<double>& uarg, const SchemeOptions& opts) {
  const int n = ctx.grid.size();
  StepRaw r;
  r.out.resize(n);
  r.argmin.resize(n);
  std::vector<char> edge_flags(n, 0), excl_flags(n, 0);
  parallel_for(n, opts.threads, [&](int i) {
    bool edge = false;
    int bj;
    double v = ctx.minimize(in.data(), uarg.data(), i, &bj, &edge);
    r.out[i] = v;
    r.argmin[i] = bj;
    if (edge) edge_flags[i] = 1;
    if (bj < 0) excl_flags[i] = 1;
  });
  if (opts.u_rule == URule::midpoint) {
    std::vector<double> prev = r.out;
    std::vector<double> next(n);
    for (int sweep = 0; sweep < opts.midpoint_sweeps; ++sweep) {
      parallel_for(n, opts.threads, [&](int i) {
        int bj;
        next[i] = ctx.minimize_midpoint(in.data(), prev[i], i, &bj);
        r.argmin[i] = bj;
      });
      std::swap(prev, next);
    }
    r.out = prev;
  }
  for (int i = 0; i < n; ++i) {
    r.edge = r.edge || edge_flags[i];
    r.excluded = r.excluded || excl_flags[i];
  }
  return r;
}

}  // namespace

StepOutput step(const HamiltonianModel& model, const ValueField& in, double dt,
                const SchemeOptions& opts) {
  int radius = resolve_radius(in.grid, dt, opts, in);
  StepContext ctx(model, in.grid, dt, radius);
  StepRaw raw = step_raw(ctx, in.values, in.values, opts);
  StepOutput out{ValueField(in.grid, std::move(raw.out)), std::move(raw.argmin), raw.edge,
                 raw.excluded};
  return out;
}

ValueField SpaceTimeField::slice(int k) const {
  std::vector<double> v(grid_.size());
  for (int i = 0; i < grid_.size(); ++i) v[i] = value(i, k);
  return ValueField(grid_, std::move(v));
}

void SpaceTimeField::set_slice(int k, const ValueField& f) {
  for (int i = 0; i < grid_.size(); ++i) value(i, k) = f[i];
}

namespace {

int reachability_horizon(int n, int radius) { return (n / 2 + radius - 1) / radius; }

EvolveResult evolve_impl(const HamiltonianModel& model, const ValueField& phi,
                         const TimeGrid& tgrid, const SchemeOptions& opts) {
  int radius = resolve_radius(phi.grid, tgrid.dt(), opts, phi);
  StepContext ctx(model, phi.grid, tgrid.dt(), radius);
  EvolveResult res{SpaceTimeField(phi.grid, tgrid), {}, radius};
  res.field.set_slice(0, phi);
  std::vector<double> cur = phi.values;
  const int reach = reachability_horizon(phi.grid.size(), radius);
  for (int k = 0; k < tgrid.steps(); ++k) {
    StepRaw raw = step_raw(ctx, cur, cur, opts);
    res.warnings.velocity_cap_binding |= raw.edge;
    if (raw.excluded && k + 1 > reach) res.warnings.disconnected_domain = true;
    for (int i = 0; i < phi.grid.size(); ++i) {
      res.field.value(i, k + 1) = raw.out[i];
      res.field.argmin(i, k + 1) = raw.argmin[i];
    }
    cur = std::move(raw.out);
  }
  return res;
}

}  // namespace

EvolveResult evolve(const HamiltonianModel& model, const ValueField& phi, const TimeGrid& tgrid,
                    const SchemeOptions& opts) {
  return evolve_impl(model, phi, tgrid, opts);
}

EvolveResult fundamental_solution(const HamiltonianModel& model, const PeriodicGrid& grid,
                                  int x0_node, double u0, const TimeGrid& tgrid,
                                  const SchemeOptions& opts) {
  // Pinned runs need an explicit window radius; the sentinel data carries no
  // usable Lipschitz information.
  if (opts.window_radius <= 0)
    throw std::invalid_argument("fundamental_solution: explicit window_radius required");
  return evolve_impl(model, pinned_field(grid, x0_node, u0), tgrid, opts);
}

namespace {

PicardResult picard_impl(const HamiltonianModel& model, const ValueField& phi,
                         const TimeGrid& tgrid, const SchemeOptions& opts, double tol,
                         int max_iter, const std::vector<double>& zeroth) {
  if (!(tol > 0.0)) throw std::invalid_argument("picard: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("picard: max_iter must be >= 1");
  const int n = phi.grid.size();
  int radius = resolve_radius(phi.grid, tgrid.dt(), opts, phi);
  SchemeOptions inner = opts;
  inner.window_radius = radius;
  inner.u_rule = URule::explicit_departure;  // the iteration freezes u wholesale
  StepContext ctx(model, phi.grid, tgrid.dt(), radius);

  PicardResult res{SpaceTimeField(phi.grid, tgrid), {}, {}};
  SpaceTimeField frozen(phi.grid, tgrid);
  for (int k = 0; k <= tgrid.steps(); ++k)
    for (int i = 0; i < n; ++i) frozen.value(i, k) = zeroth[i];

  for (int iter = 0; iter < max_iter; ++iter) {
    SpaceTimeField next(phi.grid, tgrid);
    next.set_slice(0, phi);
    std::vector<double> cur = phi.values;
    std::vector<double> uarg(n);
    for (int k = 0; k < tgrid.steps(); ++k) {
      for (int i = 0; i < n; ++i) uarg[i] = frozen.value(i, k);
      StepRaw raw = step_raw(ctx, cur, uarg, inner);
      res.warnings.velocity_cap_binding |= raw.edge;
      for (int i = 0; i < n; ++i) {
        next.value(i, k + 1) = raw.out[i];
        next.argmin(i, k + 1) = raw.argmin[i];
      }
      cur = std::move(raw.out);
    }
    double gap = 0.0;
    for (int k = 0; k <= tgrid.steps(); ++k)
      for (int i = 0; i < n; ++i) {
        double a = next.value(i, k), b = frozen.value(i, k);
        if (is_big(a) || is_big(b)) continue;
        gap = std::max(gap, std::fabs(a - b));
      }
    res.trace.gaps.push_back(gap);
    res.trace.iterations = iter + 1;
    frozen = std::move(next);
    if (gap <= tol) {
      res.trace.converged = true;
      break;
    }
  }
  res.field = std::move(frozen);
  return res;
}

}  // namespace

PicardResult picard_evolve(const HamiltonianModel& model, const ValueField& phi,
                           const TimeGrid& tgrid, const SchemeOptions& opts, double tol,
                           int max_iter) {
  // Zeroth iterate: the initial data extended constantly in time. Pinned data
  // extends as the pinned value everywhere (h_0 = u0).
  const int n = phi.grid.size();
  std::vector<double> zeroth(n);
  double fill = 0.0;
  bool pinned = false;
  for (int i = 0; i < n; ++i)
    if (is_big(phi[i])) pinned = true;
  if (pinned)
    for (int i = 0; i < n; ++i)
      if (!is_big(phi[i])) fill = phi[i];
  for (int i = 0; i < n; ++i) zeroth[i] = pinned ? fill : phi[i];
  return picard_impl(model, phi, tgrid, opts, tol, max_iter, zeroth);
}

PicardResult picard_solve(const HamiltonianModel& model, const PeriodicGrid& grid, int x0_node,
                          double u0, const TimeGrid& tgrid, const SchemeOptions& opts, double tol,
                          int max_iter, double init_offset) {
  // The zeroth iterate is u0 + init_offset everywhere; the starting guess is a
  // knob, the pinned initial data is not.
  if (opts.window_radius <= 0)
    throw std::invalid_argument("picard_solve: explicit window_radius required");
  ValueField phi = pinned_field(grid, x0_node, u0);
  std::vector<double> zeroth(grid.size(), u0 + init_offset);
  return picard_impl(model, phi, tgrid, opts, tol, max_iter, zeroth);
}

MinimizerPath backtrack(const SpaceTimeField& field, int end_node, int end_time_index) {
  const int n = field.grid().size();
  if (end_time_index < 0 || end_time_index > field.tgrid().steps())
    throw std::invalid_argument("backtrack: time index out of range");
  end_node = field.grid().wrap(end_node);
  if (is_big(field.value(end_node, end_time_index)))
    throw MalformedFieldError("backtrack: end value is a sentinel");
  std::vector<int> nodes(end_time_index + 1);
  nodes[end_time_index] = end_node;
  for (int k = end_time_index; k >= 1; --k) {
    int prev = field.argmin(nodes[k], k);
    if (prev < 0 || is_big(field.value(prev, k - 1)))
      throw MalformedFieldError("backtrack: path enters an excluded node");
    nodes[k - 1] = prev;
  }
  MinimizerPath path;
  path.nodes = std::move(nodes);
  path.values.resize(end_time_index + 1);
  path.velocities.resize(end_time_index);
  const double dt = field.tgrid().dt();
  for (int k = 0; k <= end_time_index; ++k) path.values[k] = field.value(path.nodes[k], k);
  for (int k = 0; k < end_time_index; ++k) {
    int off = signed_offset(n, path.nodes[k], path.nodes[k + 1]);
    path.velocities[k] = off * field.grid().spacing() / dt;
  }
  return path;
}

double bellman_residual(const SpaceTimeField& field, const HamiltonianModel& model,
                        const SchemeOptions& opts) {
  const int n = field.grid().size();
  int radius = opts.window_radius;
  if (radius <= 0) throw std::invalid_argument("bellman_residual: window radius required");
  StepContext ctx(model, field.grid(), field.tgrid().dt(), radius);
  SchemeOptions o = opts;
  double res = 0.0;
  std::vector<double> cur(n);
  for (int k = 0; k < field.tgrid().steps(); ++k) {
    for (int i = 0; i < n; ++i) cur[i] = field.value(i, k);
    StepRaw raw = step_raw(ctx, cur, cur, o);
    for (int i = 0; i < n; ++i) {
      double stored = field.value(i, k + 1);
      if (is_big(stored) && is_big(raw.out[i])) continue;
      res = std::max(res, std::fabs(stored - raw.out[i]));
    }
  }
  return res;
}

StreamResult evolve_stream(const HamiltonianModel& model, const ValueField& phi, double dt,
                           int steps, const SchemeOptions& opts, int window_start_k,
                           double sup_guard) {
  const int n = phi.grid.size();
  int radius = resolve_radius(phi.grid, dt, opts, phi);
  StepContext ctx(model, phi.grid, dt, radius);
  StreamResult res{{}, {}, constant_field(phi.grid, 0.0), {}, {}, 0, -1, {}};
  res.slice_mean.reserve(steps + 1);
  res.slice_sup.reserve(steps + 1);
  bool window_on = window_start_k >= 0;
  if (window_on) {
    res.window_min.assign(n, std::numeric_limits<double>::infinity());
    res.window_max.assign(n, -std::numeric_limits<double>::infinity());
  }
  std::vector<double> cur = phi.values;
  auto record = [&](int k) {
    double sum = 0.0, sup = 0.0;
    int cnt = 0;
    for (int i = 0; i < n; ++i) {
      if (is_big(cur[i])) continue;
      sum += cur[i];
      sup = std::max(sup, std::fabs(cur[i]));
      ++cnt;
    }
    res.slice_mean.push_back(cnt ? sum / cnt : 0.0);
    res.slice_sup.push_back(sup);
    if (window_on && k >= window_start_k) {
      for (int i = 0; i < n; ++i) {
        if (is_big(cur[i])) continue;
        res.window_min[i] = std::min(res.window_min[i], cur[i]);
        res.window_max[i] = std::max(res.window_max[i], cur[i]);
      }
    }
    return sup;
  };
  record(0);
  for (int k = 0; k < steps; ++k) {
    StepRaw raw = step_raw(ctx, cur, cur, opts);
    res.warnings.velocity_cap_binding |= raw.edge;
    cur = std::move(raw.out);
    res.steps_done = k + 1;
    double sup = record(k + 1);
    if (sup_guard > 0.0 && sup > sup_guard) {
      res.overflow_step = k + 1;
      break;
    }
  }
  res.final = ValueField(phi.grid, std::move(cur));
  return res;
}

}  // namespace hjfund
