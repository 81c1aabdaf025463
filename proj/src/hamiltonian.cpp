#include "hjfund/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace hjfund {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Golden-section maximization of f on [lo, hi]; returns the abscissa.
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters) {
  const double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}
}  // namespace

Potential Potential::tabulated(std::vector<double> samples, double length) {
  if (samples.size() < 2) throw std::invalid_argument("Potential: table needs >= 2 samples");
  if (!(length > 0.0)) throw std::invalid_argument("Potential: length must be positive");
  Potential p;
  p.tabulated_ = true;
  p.table_ = std::move(samples);
  p.length_ = length;
  return p;
}

double Potential::operator()(double x) const {
  if (!tabulated_) return offset_ + amplitude_ * std::cos(kTwoPi * mode_ * x);
  const int m = static_cast<int>(table_.size());
  double s = std::fmod(x, length_);
  if (s < 0) s += length_;
  double pos = s / length_ * m;
  int i = static_cast<int>(pos);
  if (i >= m) i = m - 1;
  double frac = pos - i;
  double v0 = table_[i];
  double v1 = table_[(i + 1) % m];
  return v0 + frac * (v1 - v0);
}

double Potential::derivative(double x) const {
  if (!tabulated_)
    return -amplitude_ * kTwoPi * mode_ * std::sin(kTwoPi * mode_ * x);
  const int m = static_cast<int>(table_.size());
  double s = std::fmod(x, length_);
  if (s < 0) s += length_;
  double pos = s / length_ * m;
  int i = static_cast<int>(pos);
  if (i >= m) i = m - 1;
  double v0 = table_[i];
  double v1 = table_[(i + 1) % m];
  return (v1 - v0) * m / length_;
}

HamiltonianModel HamiltonianModel::quadratic(double kinetic_coefficient, double u_coupling,
                                             Potential potential, double shift) {
  if (!(kinetic_coefficient > 0.0))
    throw std::invalid_argument("HamiltonianModel: kinetic coefficient must be positive");
  HamiltonianModel m;
  m.kind_ = Kind::quadratic_family;
  m.kinetic_ = kinetic_coefficient;
  m.beta_ = u_coupling;
  m.potential_ = std::move(potential);
  m.shift_ = shift;
  m.lambda_ = std::fabs(u_coupling);
  return m;
}

HamiltonianModel HamiltonianModel::custom(std::function<double(double, double, double)> hamiltonian,
                                          double p_max, double shift) {
  if (!(p_max > 0.0)) throw std::invalid_argument("HamiltonianModel: p_max must be positive");
  HamiltonianModel m;
  m.kind_ = Kind::custom_convex;
  m.h_fn_ = std::move(hamiltonian);
  m.p_max_ = p_max;
  m.shift_ = shift;
  // lambda = sup over samples of |H_u| by central differences
  double sup = 0.0;
  const int nx = 17, np = 17;
  const double us[] = {-2.0, -0.5, 0.0, 0.5, 2.0};
  for (int ix = 0; ix < nx; ++ix) {
    double x = ix / static_cast<double>(nx);
    for (int ip = 0; ip < np; ++ip) {
      double p = -p_max + 2.0 * p_max * ip / (np - 1);
      for (double u : us) {
        double h = 1e-5 * std::max(1.0, std::fabs(u));
        double d = (m.h_fn_(x, u + h, p) - m.h_fn_(x, u - h, p)) / (2 * h);
        sup = std::max(sup, std::fabs(d));
      }
    }
  }
  m.lambda_ = sup;
  return m;
}

double HamiltonianModel::hamiltonian(double x, double u, double p) const {
  if (kind_ == Kind::quadratic_family)
    return 0.5 * kinetic_ * p * p + beta_ * u + potential_(x) - shift_;
  return h_fn_(x, u, p) - shift_;
}

double HamiltonianModel::lagrangian(double x, double u, double v) const {
  if (kind_ == Kind::quadratic_family) {
    // Evaluation order fixed so the DP fast path reproduces these exact bits.
    return ((v * v * (0.5 / kinetic_) - beta_ * u) - potential_(x)) + shift_;
  }
  auto target = [&](double p) { return p * v - h_fn_(x, u, p); };
  // coarse scan to bracket, then golden-section refinement
  const int ncoarse = 65;
  int best = 0;
  double best_val = target(-p_max_);
  for (int i = 1; i < ncoarse; ++i) {
    double p = -p_max_ + 2.0 * p_max_ * i / (ncoarse - 1);
    double val = target(p);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  if (best == 0 || best == ncoarse - 1)
    throw TransformWindowOverflow("Legendre transform argmax on window boundary (|p| = p_max); enlarge p_max");
  double cell = 2.0 * p_max_ / (ncoarse - 1);
  double lo = -p_max_ + (best - 1) * cell;
  double hi = -p_max_ + (best + 1) * cell;
  double p_star = golden_max(target, lo, hi, 90);
  return target(p_star) + shift_;
}

HamiltonianGradient HamiltonianModel::grad_hamiltonian(double x, double u, double p) const {
  if (kind_ == Kind::quadratic_family)
    return {potential_.derivative(x), beta_, kinetic_ * p};
  auto fd = [](double f_plus, double f_minus, double h) { return (f_plus - f_minus) / (2 * h); };
  double hx = 1e-5 * std::max(1.0, std::fabs(x));
  double hu = 1e-5 * std::max(1.0, std::fabs(u));
  double hp = 1e-5 * std::max(1.0, std::fabs(p));
  return {fd(h_fn_(x + hx, u, p), h_fn_(x - hx, u, p), hx),
          fd(h_fn_(x, u + hu, p), h_fn_(x, u - hu, p), hu),
          fd(h_fn_(x, u, p + hp), h_fn_(x, u, p - hp), hp)};
}

}  // namespace hjfund
