#ifndef HJFUND_CRITICAL_HPP
#define HJFUND_CRITICAL_HPP

#include <optional>
#include <string>
#include <vector>

#include "hjfund/propagator.hpp"

namespace hjfund {

enum class DriftClass { diverges_up, diverges_down, bounded };

std::string to_string(DriftClass c);

struct DriftOptions {
  double drift_tol = 1e-3;   ///< per unit time
  double sup_guard = 1e6;    ///< boundedness guard on the finite sup-norm
  SchemeOptions scheme{};
};

/// Long-horizon classification of one shifted model. The drift rate is the
/// least-squares slope of the spatial mean over the trailing half of the
/// horizon (the signed quantity the bisection needs); boundedness additionally
/// requires the trailing sup-norm to stay under the guard. Runs that trip the
/// guard early classify by the sign of the last finite slice mean.
struct DriftReport {
  DriftClass classification = DriftClass::bounded;
  double drift_rate = 0.0;
  double trailing_sup = 0.0;
  bool overflowed = false;
  double overflow_time = -1.0;
};

DriftReport classify_drift(const HamiltonianModel& model, const ValueField& phi, double horizon_T,
                           double dt, const DriftOptions& opts);

struct CriticalEntry {
  double c;
  DriftReport report;
};

struct CriticalValueReport {
  std::vector<CriticalEntry> entries;
  std::optional<double> c_star;
  bool no_bracket = false;
};

/// Classifies every requested shift value; independent shifts classify in
/// parallel across the caller's thread budget.
CriticalValueReport classify_shifts(const HamiltonianModel& base, const ValueField& phi,
                                    const std::vector<double>& c_values, double horizon_T,
                                    double dt, const DriftOptions& opts);

struct BracketResult {
  enum class Status { ok, no_bracket } status = Status::no_bracket;
  std::optional<double> c_star;
  DriftReport lo_report, hi_report;
  int bisections = 0;
};

/// Bisection on the drift sign over [c_lo, c_hi]. A valid bracket needs one
/// end drifting down and the other up; anything else is a no-bracket outcome
/// (a legitimate result: the critical set may be empty or the whole line).
BracketResult critical_search(const HamiltonianModel& base, const ValueField& phi, double c_lo,
                              double c_hi, double horizon_T, double dt, int max_bisect,
                              const DriftOptions& opts);

/// Mane critical value of the frozen-u Lagrangian for the quadratic family:
/// inf over C^1 functions of sup_x H(x, a, u') is attained at constants for
/// mechanical Hamiltonians, giving beta*a + max V on a fine grid. The shift is
/// excluded (the value normalizes the unshifted model).
double mane_value_frozen(const HamiltonianModel& model, double a, int n_fine = 4096);

}  // namespace hjfund

#endif
