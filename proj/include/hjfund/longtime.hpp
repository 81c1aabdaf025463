#ifndef HJFUND_LONGTIME_HPP
#define HJFUND_LONGTIME_HPP

#include <vector>

#include "hjfund/critical.hpp"
#include "hjfund/propagator.hpp"

namespace hjfund {

struct LongtimeOptions {
  double horizon_T = 50.0;
  double window_W = 10.0;
  double dt = 1e-2;
  double stationary_tol = 1e-6;
  int max_steps = 200000;
  double aubry_tol = 1e-2;
  bool check_bounded = true;   ///< gate on the critical module's classification
  double gate_horizon = 20.0;
  DriftOptions drift{};
  SchemeOptions scheme{};
};

/// The long-time limit machinery refuses to run on models classified as
/// divergent; the caller gets the gate report back instead of unbounded data.
struct GateReport {
  bool passed = true;
  DriftReport drift;
};

GateReport longtime_gate(const HamiltonianModel& model, const ValueField& phi,
                         const LongtimeOptions& opts);

/// Trailing-window pointwise minimum of the semigroup orbit, i.e. a computable
/// surrogate of liminf T_t phi, plus the window oscillation per node so callers
/// can see whether the liminf is already a limit.
struct LiminfResult {
  ValueField field;
  std::vector<double> oscillation;
  bool diverged = false;
  DriftReport gate;
};

LiminfResult liminf_field(const HamiltonianModel& model, const ValueField& phi,
                          const LongtimeOptions& opts);

enum class StationaryMode { fixed_point_iteration, liminf_window };

struct StationaryResult {
  ValueField u_star;
  double fixed_point_residual = 0.0;
  int iterations = 0;
  StationaryMode mode = StationaryMode::fixed_point_iteration;
  bool converged = false;
  bool diverged = false;
};

/// Discrete weak-KAM fixed point of the one-step operator. Models with strict
/// monotonicity H_u > 0 iterate to the unique fixed point (contraction);
/// everything else falls back to the liminf window surrogate.
StationaryResult stationary_solve(const HamiltonianModel& model, const ValueField& phi_init,
                                  const LongtimeOptions& opts);

/// Long-time barrier slice B(x0, u0; .): the trailing-window estimate of the
/// pinned fundamental solution at infinity, minus u0.
struct BarrierResult {
  ValueField field;
  std::vector<double> oscillation;
  bool diverged = false;
};

BarrierResult barrier(const HamiltonianModel& model, const PeriodicGrid& grid, int x0_node,
                      double u0, const LongtimeOptions& opts);

struct AubryReport {
  std::vector<double> barrier_diag;            ///< B(x, u_star(x); x) per node
  std::vector<int> aubry_nodes;                ///< |diag| <= tol_used
  std::vector<double> u_on_aubry;
  double tol_used = 0.0;
  bool escalated = false;   ///< tolerance had to be doubled to find members
  bool flagged_empty = false;
  std::vector<std::vector<double>> barrier_fields;  ///< B(y, u_star(y); .) per source y
};

/// Barrier diagonal per node (sources run in parallel) and the set where it
/// vanishes within tolerance. An empty set at a bounded model escalates the
/// tolerance by doubling, up to 8x, before flagging.
AubryReport aubry_set(const HamiltonianModel& model, const ValueField& u_star,
                      const LongtimeOptions& opts);

/// Max deviation of min_{y in Aubry} [B(y, u_star(y); x) + u_star(y)] from
/// u_star, reusing the barrier fields stored in the report.
double representation_check(const ValueField& u_star, const AubryReport& report);

}  // namespace hjfund

#endif
