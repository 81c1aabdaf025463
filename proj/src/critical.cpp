#include "hjfund/critical.hpp"

#include <algorithm>
#include <cmath>

#include "hjfund/parallel.hpp"

namespace hjfund {

std::string to_string(DriftClass c) {
  switch (c) {
    case DriftClass::diverges_up: return "diverges_up";
    case DriftClass::diverges_down: return "diverges_down";
    case DriftClass::bounded: return "bounded";
  }
  return "?";
}

namespace {

// Least-squares slope of y against t over [lo, hi).
double ls_slope(const std::vector<double>& y, double dt, int lo, int hi) {
  int m = hi - lo;
  if (m < 2) return 0.0;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int k = lo; k < hi; ++k) {
    double t = k * dt;
    st += t;
    sy += y[k];
    stt += t * t;
    sty += t * y[k];
  }
  double denom = m * stt - st * st;
  if (denom == 0.0) return 0.0;
  return (m * sty - st * sy) / denom;
}

}  // namespace

DriftReport classify_drift(const HamiltonianModel& model, const ValueField& phi, double horizon_T,
                           double dt, const DriftOptions& opts) {
  if (horizon_T < 20.0)
    throw std::invalid_argument("classify_drift: horizon_T must be >= 20");
  int steps = static_cast<int>(std::llround(horizon_T / dt));
  StreamResult stream =
      evolve_stream(model, phi, dt, steps, opts.scheme, /*window_start_k=*/-1, opts.sup_guard);

  DriftReport rep;
  if (stream.overflow_step >= 0) {
    rep.overflowed = true;
    rep.overflow_time = stream.overflow_step * dt;
    rep.trailing_sup = stream.slice_sup.back();
    // Divergence direction from the last finite slice; the rate from the slope
    // over whatever trailing half exists.
    int done = static_cast<int>(stream.slice_mean.size());
    rep.drift_rate = ls_slope(stream.slice_mean, dt, done / 2, done);
    double last_mean = stream.slice_mean.back();
    rep.classification = last_mean >= 0.0 ? DriftClass::diverges_up : DriftClass::diverges_down;
    return rep;
  }

  int done = static_cast<int>(stream.slice_mean.size());
  rep.drift_rate = ls_slope(stream.slice_mean, dt, done / 2, done);
  double trailing_sup = 0.0;
  for (int k = done / 2; k < done; ++k) trailing_sup = std::max(trailing_sup, stream.slice_sup[k]);
  rep.trailing_sup = trailing_sup;
  if (std::fabs(rep.drift_rate) <= opts.drift_tol && trailing_sup <= opts.sup_guard)
    rep.classification = DriftClass::bounded;
  else
    rep.classification =
        rep.drift_rate >= 0.0 ? DriftClass::diverges_up : DriftClass::diverges_down;
  return rep;
}

CriticalValueReport classify_shifts(const HamiltonianModel& base, const ValueField& phi,
                                    const std::vector<double>& c_values, double horizon_T,
                                    double dt, const DriftOptions& opts) {
  if (horizon_T < 20.0)
    throw std::invalid_argument("classify_drift: horizon_T must be >= 20");
  CriticalValueReport rep;
  rep.entries.resize(c_values.size());
  DriftOptions inner = opts;
  inner.scheme.threads = 1;  // parallel across shifts instead
  parallel_for(static_cast<int>(c_values.size()), opts.scheme.threads, [&](int i) {
    rep.entries[i] = {c_values[i],
                      classify_drift(base.with_shift(c_values[i]), phi, horizon_T, dt, inner)};
  });
  return rep;
}

BracketResult critical_search(const HamiltonianModel& base, const ValueField& phi, double c_lo,
                              double c_hi, double horizon_T, double dt, int max_bisect,
                              const DriftOptions& opts) {
  if (!(c_lo < c_hi)) throw std::invalid_argument("critical_search: need c_lo < c_hi");
  BracketResult res;
  res.lo_report = classify_drift(base.with_shift(c_lo), phi, horizon_T, dt, opts);
  res.hi_report = classify_drift(base.with_shift(c_hi), phi, horizon_T, dt, opts);
  bool lo_down = res.lo_report.classification == DriftClass::diverges_down;
  bool lo_up = res.lo_report.classification == DriftClass::diverges_up;
  bool hi_down = res.hi_report.classification == DriftClass::diverges_down;
  bool hi_up = res.hi_report.classification == DriftClass::diverges_up;
  if (!((lo_down && hi_up) || (lo_up && hi_down))) {
    res.status = BracketResult::Status::no_bracket;
    return res;
  }
  // Orientation: sign of the drift at the "down" end is negative. Bisect on
  // the sign of the measured drift rate.
  double lo = c_lo, hi = c_hi;
  double sign_lo = res.lo_report.drift_rate < 0 ? -1.0 : 1.0;
  for (int it = 0; it < max_bisect; ++it) {
    double mid = 0.5 * (lo + hi);
    DriftReport mid_rep = classify_drift(base.with_shift(mid), phi, horizon_T, dt, opts);
    double s = mid_rep.drift_rate < 0 ? -1.0 : 1.0;
    if (s == sign_lo)
      lo = mid;
    else
      hi = mid;
    res.bisections = it + 1;
  }
  res.status = BracketResult::Status::ok;
  res.c_star = 0.5 * (lo + hi);
  return res;
}

double mane_value_frozen(const HamiltonianModel& model, double a, int n_fine) {
  if (!model.is_quadratic())
    throw std::invalid_argument("mane_value_frozen: closed form only for the quadratic family");
  if (n_fine < 2) throw std::invalid_argument("mane_value_frozen: n_fine must be >= 2");
  double vmax = -1e300;
  for (int i = 0; i < n_fine; ++i) {
    double x = static_cast<double>(i) / n_fine;
    vmax = std::max(vmax, model.potential()(x));
  }
  return model.u_coupling() * a + vmax;
}

}  // namespace hjfund
