#include "hjfund/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjfund/parallel.hpp"

namespace hjfund {

CharacteristicRate ode_rhs(const HamiltonianModel& model, const CharacteristicState& s) {
  HamiltonianGradient g = model.grad_hamiltonian(s.x, s.u, s.p);
  double h = model.hamiltonian(s.x, s.u, s.p);
  return {g.p, s.p * g.p - h, -g.x - g.u * s.p};
}

namespace {

bool beyond_guard(const CharacteristicState& s, double guard) {
  return !(std::fabs(s.u) <= guard && std::fabs(s.p) <= guard && std::fabs(s.x) <= guard);
}

CharacteristicState rk4_step(const HamiltonianModel& model, const CharacteristicState& s,
                             double h) {
  auto add = [](const CharacteristicState& a, const CharacteristicRate& r, double f) {
    return CharacteristicState{a.x + f * r.dx, a.u + f * r.du, a.p + f * r.dp};
  };
  CharacteristicRate k1 = ode_rhs(model, s);
  CharacteristicRate k2 = ode_rhs(model, add(s, k1, 0.5 * h));
  CharacteristicRate k3 = ode_rhs(model, add(s, k2, 0.5 * h));
  CharacteristicRate k4 = ode_rhs(model, add(s, k3, h));
  return {s.x + h / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx),
          s.u + h / 6.0 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du),
          s.p + h / 6.0 * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp)};
}

int auto_ode_steps(double t, int requested) {
  if (requested > 0) return requested;
  return std::max(64, static_cast<int>(std::ceil(128.0 * t)));
}

}  // namespace

Trajectory integrate(const HamiltonianModel& model, const CharacteristicState& initial, double t,
                     int n_steps, double overflow_guard) {
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  double h = t / n_steps;
  CharacteristicState s = initial;
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  for (int k = 0; k < n_steps; ++k) {
    s = rk4_step(model, s, h);
    if (beyond_guard(s, overflow_guard)) {
      traj.truncated = true;
      break;
    }
    traj.times.push_back((k + 1) * h);
    traj.states.push_back(s);
  }
  return traj;
}

CharacteristicState integrate_final(const HamiltonianModel& model, CharacteristicState s,
                                    double t, int n_steps, bool* truncated,
                                    double overflow_guard) {
  double h = t / n_steps;
  if (truncated) *truncated = false;
  for (int k = 0; k < n_steps; ++k) {
    s = rk4_step(model, s, h);
    if (beyond_guard(s, overflow_guard)) {
      if (truncated) *truncated = true;
      return s;
    }
  }
  return s;
}

std::vector<ShootHit> shoot(const HamiltonianModel& model, double x0, double u0, double target_x,
                            double t, const PeriodicGrid& grid, const ShootParams& params) {
  if (params.n_samples < 2) throw std::invalid_argument("shoot: n_samples must be >= 2");
  const int steps = auto_ode_steps(t, params.ode_steps);
  const int ns = params.n_samples;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Endpoint sweep over the sampled momenta; NaN marks truncated samples.
  std::vector<double> p0s(ns), xT(ns);
  for (int i = 0; i < ns; ++i)
    p0s[i] = -params.p0_max + 2.0 * params.p0_max * i / (ns - 1);
  parallel_for(ns, params.threads, [&](int i) {
    bool trunc = false;
    CharacteristicState fin =
        integrate_final(model, {x0, u0, p0s[i]}, t, steps, &trunc, params.overflow_guard);
    xT[i] = trunc ? nan : fin.x;
  });

  std::vector<ShootHit> hits;
  const double length = grid.length();
  // Candidate lifted targets: target_x + m * length per winding m.
  for (int m = -params.m_max; m <= params.m_max; ++m) {
    double level = target_x + m * length;
    for (int i = 0; i + 1 < ns; ++i) {
      double g0 = xT[i] - level;
      double g1 = xT[i + 1] - level;
      if (std::isnan(g0) || std::isnan(g1)) continue;
      if (g0 == 0.0 && i > 0) continue;  // already captured by the previous pair
      if (g0 * g1 > 0.0) continue;
      double lo = p0s[i], hi = p0s[i + 1];
      double glo = g0;
      for (int it = 0; it < params.refine_iters; ++it) {
        double mid = 0.5 * (lo + hi);
        bool trunc = false;
        CharacteristicState fin =
            integrate_final(model, {x0, u0, mid}, t, steps, &trunc, params.overflow_guard);
        double gm = trunc ? nan : fin.x - level;
        if (std::isnan(gm)) break;
        if (glo * gm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          glo = gm;
        }
      }
      double p_star = 0.5 * (lo + hi);
      bool trunc = false;
      CharacteristicState fin =
          integrate_final(model, {x0, u0, p_star}, t, steps, &trunc, params.overflow_guard);
      if (trunc) continue;
      double err = std::fabs(fin.x - level);
      if (err <= params.eps_hit) hits.push_back({p_star, m, fin, err});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const ShootHit& a, const ShootHit& b) {
    if (a.final.u != b.final.u) return a.final.u < b.final.u;
    if (a.p0 != b.p0) return a.p0 < b.p0;
    return a.winding < b.winding;
  });
  return hits;
}

MinCharResult min_over_characteristics(const HamiltonianModel& model, const ValueField& phi,
                                       double target_x, double t, const ShootParams& params) {
  const int n = phi.grid.size();
  ShootParams inner = params;
  inner.threads = 1;  // parallelism lives on the source loop
  std::vector<MinCharResult> per_source(n);
  parallel_for(n, params.threads, [&](int y) {
    if (is_big(phi[y])) return;
    auto hits = shoot(model, phi.grid.node(y), phi[y], target_x, t, phi.grid, inner);
    if (hits.empty()) return;
    per_source[y] = {true, hits.front().final.u, hits.front(), y};
  });
  MinCharResult best;
  for (int y = 0; y < n; ++y) {
    if (!per_source[y].found) continue;
    if (!best.found || per_source[y].value < best.value) best = per_source[y];
  }
  return best;
}

}  // namespace hjfund
