#ifndef HJFUND_CHARACTERISTICS_HPP
#define HJFUND_CHARACTERISTICS_HPP

#include <vector>

#include "hjfund/domain.hpp"
#include "hjfund/hamiltonian.hpp"
#include "hjfund/propagator.hpp"

namespace hjfund {

/// A point of the contact flow. The position lives on the universal cover;
/// reduce mod length only when comparing against torus positions.
struct CharacteristicState {
  double x;
  double u;
  double p;
};

struct CharacteristicRate {
  double dx;
  double du;
  double dp;
};

/// Right-hand side of the characteristic system:
///   dx = H_p,  du = p H_p - H,  dp = -H_x - H_u p.
CharacteristicRate ode_rhs(const HamiltonianModel& model, const CharacteristicState& s);

struct Trajectory {
  std::vector<double> times;
  std::vector<CharacteristicState> states;
  bool truncated = false;  ///< overflow guard tripped before the final time
};

/// Classical 4th-order one-step integration of the contact flow. States whose
/// |u| or |p| pass the overflow guard truncate the trajectory (legitimate for
/// genuinely divergent models) rather than erroring.
Trajectory integrate(const HamiltonianModel& model, const CharacteristicState& initial, double t,
                     int n_steps, double overflow_guard = 1e9);

/// Final state only; cheaper inner loop for shooting.
CharacteristicState integrate_final(const HamiltonianModel& model, CharacteristicState s,
                                    double t, int n_steps, bool* truncated,
                                    double overflow_guard = 1e9);

struct ShootParams {
  double p0_max = 10.0;
  int n_samples = 512;
  int refine_iters = 60;
  double eps_hit = 1e-10;
  int m_max = 3;        ///< winding numbers tested: |m| <= m_max
  int ode_steps = 0;    ///< 0 = max(64, ceil(128 t))
  double overflow_guard = 1e9;
  int threads = 1;
};

struct ShootHit {
  double p0;
  int winding;
  CharacteristicState final;
  double hit_error;  ///< |X(t) - lifted target| at the refined momentum
};

/// Samples initial momenta uniformly over [-p0_max, p0_max], then bisects on
/// every sign change of the lifted endpoint against each winding image of the
/// target. Hits are sorted by final u ascending (p0, then winding, as
/// tie-breakers), so the output is deterministic for fixed parameters.
std::vector<ShootHit> shoot(const HamiltonianModel& model, double x0, double u0, double target_x,
                            double t, const PeriodicGrid& grid, const ShootParams& params);

struct MinCharResult {
  bool found = false;
  double value = 0.0;
  ShootHit best{};
  int source_node = -1;
};

/// min over grid sources y and over characteristics from (y, phi(y)) hitting
/// the target of the carried value U(t).
MinCharResult min_over_characteristics(const HamiltonianModel& model, const ValueField& phi,
                                       double target_x, double t, const ShootParams& params);

}  // namespace hjfund

#endif
