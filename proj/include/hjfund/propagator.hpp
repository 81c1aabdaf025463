#ifndef HJFUND_PROPAGATOR_HPP
#define HJFUND_PROPAGATOR_HPP

#include <functional>
#include <stdexcept>
#include <vector>

#include "hjfund/domain.hpp"
#include "hjfund/hamiltonian.hpp"

namespace hjfund {

/// Sentinel encoding pinned-away initial data. Candidates at or above
/// kBigValue/2 are excluded from every minimization instead of being
/// penalized, so the u-dependence of L never sees sentinel values.
inline constexpr double kBigValue = 1e12;

inline bool is_big(double v) { return v >= 0.5 * kBigValue; }

/// Function values on the spatial grid at one instant.
struct ValueField {
  PeriodicGrid grid;
  std::vector<double> values;

  ValueField(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.size())
      throw std::invalid_argument("ValueField: size mismatch");
  }
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
  int size() const { return grid.size(); }
};

ValueField constant_field(const PeriodicGrid& grid, double value);
ValueField make_field(const PeriodicGrid& grid, const std::function<double(double)>& f);
ValueField pinned_field(const PeriodicGrid& grid, int node, double u0);

double sup_distance(const ValueField& a, const ValueField& b);

/// Lipschitz bound of the finite part of a field, from one-sided grid
/// differences.
double field_lipschitz(const ValueField& f);

enum class URule { explicit_departure, midpoint };

struct SchemeOptions {
  int window_radius = 0;  ///< 0 = derive from the data's Lipschitz bound
  URule u_rule = URule::explicit_departure;
  int midpoint_sweeps = 5;
  int threads = 1;
};

/// Window radius giving velocity cap >= 4 * (lipschitz_bound + 1), clipped to
/// the half torus.
int default_window_radius(const PeriodicGrid& grid, double dt, double lipschitz_bound);

struct StepOutput {
  ValueField field;
  std::vector<int> argmin;   ///< minimizing departure node, -1 where everything was excluded
  bool edge_argmin = false;  ///< some finite argmin landed on the window edge (binding cap)
  bool any_excluded = false;
};

/// One semi-Lagrangian Bellman step:
///   out(i) = min_{j in window} [ in(j) + dt * L(x_j, in(j), disp(j->i)/dt) ]
/// with L's u slot read at the departure point (explicit rule) or at the
/// midpoint average (midpoint rule, a fixed number of inner sweeps). Ties take
/// the smallest node index. Requires lambda * dt <= 0.5 so the per-step map
/// stays monotone.
StepOutput step(const HamiltonianModel& model, const ValueField& in, double dt,
                const SchemeOptions& opts);

/// h(x, t_k) over the full space-time grid, with the argmin backtracking links
/// produced by the per-step minimizations.
class SpaceTimeField {
 public:
  SpaceTimeField(PeriodicGrid grid, TimeGrid tgrid)
      : grid_(grid),
        tgrid_(tgrid),
        values_(static_cast<size_t>(grid.size()) * (tgrid.steps() + 1)),
        argmin_(static_cast<size_t>(grid.size()) * tgrid.steps(), -1) {}

  const PeriodicGrid& grid() const { return grid_; }
  const TimeGrid& tgrid() const { return tgrid_; }

  double value(int node, int k) const { return values_[idx(node, k)]; }
  double& value(int node, int k) { return values_[idx(node, k)]; }

  /// Argmin pointer into slice k-1 that produced value(node, k); k >= 1.
  int argmin(int node, int k) const { return argmin_[idx(node, k - 1)]; }
  int& argmin(int node, int k) { return argmin_[idx(node, k - 1)]; }

  ValueField slice(int k) const;
  void set_slice(int k, const ValueField& f);

  const std::vector<double>& raw_values() const { return values_; }

 private:
  size_t idx(int node, int k) const { return static_cast<size_t>(k) * grid_.size() + node; }

  PeriodicGrid grid_;
  TimeGrid tgrid_;
  std::vector<double> values_;
  std::vector<int> argmin_;
};

struct EvolveWarnings {
  bool velocity_cap_binding = false;
  bool disconnected_domain = false;
};

struct EvolveResult {
  SpaceTimeField field;
  EvolveWarnings warnings;
  int window_radius = 0;
};

/// Iterates step over the whole time grid, storing every slice and argmin
/// layer. The stored field satisfies its own Bellman recursion exactly.
EvolveResult evolve(const HamiltonianModel& model, const ValueField& phi, const TimeGrid& tgrid,
                    const SchemeOptions& opts);

/// evolve with initial data pinned at one node: phi(x0) = u0, kBigValue
/// elsewhere. Slices become finite everywhere once the window has had time to
/// reach the whole torus.
EvolveResult fundamental_solution(const HamiltonianModel& model, const PeriodicGrid& grid,
                                  int x0_node, double u0, const TimeGrid& tgrid,
                                  const SchemeOptions& opts);

/// Sup-norm gaps of the whole-field fixed-point iteration.
struct PicardTrace {
  std::vector<double> gaps;
  bool converged = false;
  int iterations = 0;
};

struct PicardResult {
  SpaceTimeField field;
  PicardTrace trace;
  EvolveWarnings warnings;
};

/// Whole-field fixed-point iteration: each pass solves the u-frozen forward
/// DP against the previous iterate's space-time field, starting from the
/// constant-in-time extension of the initial data. Stops when the sup gap over
/// mutually finite entries drops below tol.
PicardResult picard_evolve(const HamiltonianModel& model, const ValueField& phi,
                           const TimeGrid& tgrid, const SchemeOptions& opts, double tol,
                           int max_iter);

/// Picard iteration for the pinned fundamental solution; the zeroth iterate is
/// u0 + init_offset everywhere.
PicardResult picard_solve(const HamiltonianModel& model, const PeriodicGrid& grid, int x0_node,
                          double u0, const TimeGrid& tgrid, const SchemeOptions& opts, double tol,
                          int max_iter, double init_offset = 0.0);

/// Discrete calibrated curve recovered by following argmin pointers backwards.
struct MinimizerPath {
  std::vector<int> nodes;         ///< node per time index, 0..end
  std::vector<double> values;     ///< field value along the path
  std::vector<double> velocities; ///< displacement / dt per link (size end)
};

class MalformedFieldError : public std::runtime_error {
 public:
  explicit MalformedFieldError(const std::string& what) : std::runtime_error(what) {}
};

MinimizerPath backtrack(const SpaceTimeField& field, int end_node, int end_time_index);

/// Max over interior entries of |stored value - recomputed Bellman min|.
double bellman_residual(const SpaceTimeField& field, const HamiltonianModel& model,
                        const SchemeOptions& opts);

/// Streaming evolve: keeps only the running slice plus per-slice statistics
/// and a trailing-window pointwise min/max. Evolution stops early when the
/// finite sup-norm passes sup_guard (> 0).
struct StreamResult {
  std::vector<double> slice_mean;  ///< spatial mean of finite entries, per computed slice
  std::vector<double> slice_sup;   ///< sup |value| over finite entries
  ValueField final;
  std::vector<double> window_min;
  std::vector<double> window_max;
  int steps_done = 0;
  int overflow_step = -1;  ///< first step whose sup passed the guard, -1 if none
  EvolveWarnings warnings;
};

StreamResult evolve_stream(const HamiltonianModel& model, const ValueField& phi, double dt,
                           int steps, const SchemeOptions& opts, int window_start_k = -1,
                           double sup_guard = 0.0);

}  // namespace hjfund

#endif
