#ifndef HJFUND_HAMILTONIAN_HPP
#define HJFUND_HAMILTONIAN_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjfund {

/// The numeric Legendre transform hit the edge of its momentum search window,
/// which means the window does not contain the conjugate point.
class TransformWindowOverflow : public std::runtime_error {
 public:
  explicit TransformWindowOverflow(const std::string& what) : std::runtime_error(what) {}
};

/// Potential V(x) on the torus: either the closed form A + B*cos(2*pi*k*x) or
/// a tabulated profile with piecewise-linear periodic interpolation.
class Potential {
 public:
  Potential() : Potential(0.0, 0.0, 1) {}
  Potential(double offset, double amplitude, int mode)
      : offset_(offset), amplitude_(amplitude), mode_(mode) {
    if (mode < 1) throw std::invalid_argument("Potential: mode must be >= 1");
  }

  static Potential constant(double value) { return Potential(value, 0.0, 1); }
  static Potential cosine(double offset, double amplitude, int mode) {
    return Potential(offset, amplitude, mode);
  }
  static Potential tabulated(std::vector<double> samples, double length);

  double operator()(double x) const;
  double derivative(double x) const;
  bool is_constant() const { return !tabulated_ && amplitude_ == 0.0; }
  bool is_tabulated() const { return tabulated_; }

 private:
  double offset_;
  double amplitude_;
  int mode_;
  bool tabulated_ = false;
  std::vector<double> table_;
  double length_ = 1.0;
};

struct HamiltonianGradient {
  double x;
  double u;
  double p;
};

/// Hamiltonian H(x,u,p), convex and superlinear in p and uniformly Lipschitz
/// in u, together with its Legendre-dual Lagrangian. Two kinds are supported:
///
///   quadratic family   H = (a/2) p^2 + beta u + V(x) - c,
///                      L = v^2/(2a) - beta u - V(x) + c   (closed forms)
///
///   custom convex      H given as a callable; L by grid + golden-section
///                      search over p in [-p_max, p_max], derivatives by
///                      central differences.
///
/// The additive shift c enters the Hamiltonian as -c and the Lagrangian as +c
/// (the normalization L_c = L + c). Models are immutable once built; all
/// evaluations are const and safe to call concurrently.
class HamiltonianModel {
 public:
  enum class Kind { quadratic_family, custom_convex };

  static HamiltonianModel quadratic(double kinetic_coefficient, double u_coupling,
                                    Potential potential, double shift = 0.0);

  static HamiltonianModel custom(std::function<double(double, double, double)> hamiltonian,
                                 double p_max = 20.0, double shift = 0.0);

  Kind kind() const { return kind_; }
  bool is_quadratic() const { return kind_ == Kind::quadratic_family; }
  double kinetic_coefficient() const { return kinetic_; }
  double u_coupling() const { return beta_; }
  double shift() const { return shift_; }
  const Potential& potential() const { return potential_; }

  /// Copy of this model with a different additive shift.
  HamiltonianModel with_shift(double c) const {
    HamiltonianModel m = *this;
    m.shift_ = c;
    return m;
  }

  /// H(x,u,p), shift included.
  double hamiltonian(double x, double u, double p) const;

  /// L(x,u,v) + c. Throws TransformWindowOverflow if the custom transform's
  /// argmax lands on the window boundary.
  double lagrangian(double x, double u, double v) const;

  /// (H_x, H_u, H_p), closed form for the quadratic family, central
  /// differences otherwise.
  HamiltonianGradient grad_hamiltonian(double x, double u, double p) const;

  /// Uniform Lipschitz constant of H (and L) in u: |beta| for the quadratic
  /// family, a sampled sup of |H_u| otherwise.
  double lipschitz_u() const { return lambda_; }

 private:
  HamiltonianModel() = default;

  Kind kind_ = Kind::quadratic_family;
  double kinetic_ = 1.0;
  double beta_ = 0.0;
  Potential potential_;
  double shift_ = 0.0;
  double lambda_ = 0.0;
  // custom kind only
  std::function<double(double, double, double)> h_fn_;
  double p_max_ = 20.0;
};

}  // namespace hjfund

#endif
