#ifndef HJFUND_ORACLE_HPP
#define HJFUND_ORACLE_HPP

#include <functional>

#include "hjfund/domain.hpp"
#include "hjfund/hamiltonian.hpp"

namespace hjfund {

/// Exhaustive path enumeration of the pinned problem on a tiny grid: every
/// window-restricted lattice path from x0 over k_steps steps, accumulating
/// the value with the explicit departure rule
///     U <- U + dt * L(x_j, U, off * spacing / dt).
/// This is the defining minimum of the dynamic program, evaluated without the
/// Bellman recursion; on identical grids the two must agree exactly.
/// Preconditions n <= 12 and k_steps <= 6 keep the path count bounded; larger
/// requests are refused with the path-count estimate.
double brute_force_value(const HamiltonianModel& model, const PeriodicGrid& grid, int x0_node,
                         double u0, int target_node, int k_steps, double dt, int window_radius);

/// Scalar ODE solution for spatially constant data under a constant potential:
/// u' = -H(x, u, 0) = -(beta u + V - c), i.e.
///   u(t) = (a - u_eq) e^{-beta t} + u_eq,  u_eq = (c - V)/beta   (beta != 0)
///   u(t) = a + (c - V) t                                          (beta == 0)
double constant_data_ode(const HamiltonianModel& model, double a_init, double t);

/// Dense minimization of the kinetic-model inf-convolution
///   min_y [ phi(y) + d(y,x)^2 / (2 a t) + c t ]
/// over n_fine >= 10 n sample points. Requires beta == 0 and V == 0.
double hopf_lax(const HamiltonianModel& model, const std::function<double(double)>& phi,
                double target_x, double t, const PeriodicGrid& grid, int n_fine);

}  // namespace hjfund

#endif
