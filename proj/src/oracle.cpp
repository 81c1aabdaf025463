#include "hjfund/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjfund {

namespace {

void enumerate(const HamiltonianModel& model, const PeriodicGrid& grid, double dt, int radius,
               int off_lo, int node, double value, int steps_left, int target, double* best) {
  if (steps_left == 0) {
    if (node == target && value < *best) *best = value;
    return;
  }
  const double x = grid.node(node);
  for (int o = off_lo; o <= radius; ++o) {
    int next = grid.wrap(node + o);
    double v = o * grid.spacing() / dt;
    double acc = value + dt * model.lagrangian(x, value, v);
    enumerate(model, grid, dt, radius, off_lo, next, acc, steps_left - 1, target, best);
  }
}

}  // namespace

double brute_force_value(const HamiltonianModel& model, const PeriodicGrid& grid, int x0_node,
                         double u0, int target_node, int k_steps, double dt, int window_radius) {
  const int n = grid.size();
  if (n > 12 || k_steps > 6) {
    double count = std::pow(2.0 * window_radius + 1.0, k_steps);
    throw std::invalid_argument("brute_force_value: budget exceeded (~" +
                                std::to_string(static_cast<long long>(count)) + " paths)");
  }
  if (window_radius < 1 || 2 * window_radius > n)
    throw std::invalid_argument("brute_force_value: invalid window radius");
  int off_lo = (2 * window_radius == n) ? -window_radius + 1 : -window_radius;
  double best = 1e300;
  enumerate(model, grid, dt, window_radius, off_lo, grid.wrap(x0_node), u0, k_steps,
            grid.wrap(target_node), &best);
  return best;
}

double constant_data_ode(const HamiltonianModel& model, double a_init, double t) {
  if (!model.is_quadratic() || !model.potential().is_constant())
    throw std::invalid_argument("constant_data_ode: needs the quadratic family with constant V");
  double beta = model.u_coupling();
  double v = model.potential()(0.0);
  double c = model.shift();
  if (beta == 0.0) return a_init + (c - v) * t;
  double u_eq = (c - v) / beta;
  return (a_init - u_eq) * std::exp(-beta * t) + u_eq;
}

double hopf_lax(const HamiltonianModel& model, const std::function<double(double)>& phi,
                double target_x, double t, const PeriodicGrid& grid, int n_fine) {
  if (!model.is_quadratic() || model.u_coupling() != 0.0 || !model.potential().is_constant() ||
      model.potential()(0.0) != 0.0)
    throw std::invalid_argument("hopf_lax: needs the kinetic-only model (beta = 0, V = 0)");
  if (n_fine < 10 * grid.size())
    throw std::invalid_argument("hopf_lax: n_fine must be >= 10 n");
  const double a = model.kinetic_coefficient();
  const double c = model.shift();
  double best = 1e300;
  for (int j = 0; j < n_fine; ++j) {
    double y = grid.length() * j / n_fine;
    double d = grid.distance(y, target_x);
    double cand = phi(y) + d * d / (2.0 * a * t) + c * t;
    best = std::min(best, cand);
  }
  return best;
}

}  // namespace hjfund
