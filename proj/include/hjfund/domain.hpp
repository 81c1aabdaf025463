#ifndef HJFUND_DOMAIN_HPP
#define HJFUND_DOMAIN_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hjfund {

/// Uniform periodic grid on the flat 1-D torus of given circumference.
/// Node i sits at i * spacing; indices wrap modulo n.
class PeriodicGrid {
 public:
  PeriodicGrid(int n, double length = 1.0) : n_(n), length_(length) {
    if (n <= 0) throw std::invalid_argument("PeriodicGrid: n must be positive");
    if (!(length > 0.0)) throw std::invalid_argument("PeriodicGrid: length must be positive");
    spacing_ = length_ / n_;
  }

  int size() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return spacing_; }

  int wrap(int i) const {
    int m = i % n_;
    return m < 0 ? m + n_ : m;
  }

  double node(int i) const { return wrap(i) * spacing_; }

  /// Signed displacement d with b == a + d (mod length), d in (-length/2, length/2].
  /// The half-torus tie resolves to +length/2.
  double displacement(double a, double b) const {
    double d = std::fmod(b - a, length_);
    if (d > 0.5 * length_) d -= length_;
    if (d <= -0.5 * length_) d += length_;
    // fmod can land exactly on -length/2 after the shift when b - a is an
    // exact odd multiple of length/2; fold the tie to the positive side.
    if (d == -0.5 * length_) d = 0.5 * length_;
    return d;
  }

  double distance(double a, double b) const { return std::fabs(displacement(a, b)); }

  /// Nodes j within radius grid offsets of i, ordered by increasing signed
  /// displacement. For radius == n/2 the antipodal node appears once, on the
  /// positive side.
  std::vector<int> neighborhood(int i, int radius) const {
    if (radius < 0 || 2 * radius > n_)
      throw std::invalid_argument("PeriodicGrid: invalid window radius");
    i = wrap(i);
    int lo = -radius;
    if (2 * radius == n_) lo = -radius + 1;  // antipodal tie kept at +radius
    std::vector<int> out;
    out.reserve(radius - lo + 1);
    for (int o = lo; o <= radius; ++o) out.push_back(wrap(i + o));
    return out;
  }

  int nearest_node(double x) const {
    double s = std::fmod(x, length_);
    if (s < 0) s += length_;
    return wrap(static_cast<int>(std::lround(s / spacing_)));
  }

 private:
  int n_;
  double length_;
  double spacing_;
};

/// Uniform time grid t_k = k * dt, k = 0..steps. Times are produced by index
/// arithmetic only; nothing is accumulated.
class TimeGrid {
 public:
  TimeGrid(double dt, int steps) : dt_(dt), steps_(steps) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
    if (steps <= 0) throw std::invalid_argument("TimeGrid: steps must be positive");
  }

  double dt() const { return dt_; }
  int steps() const { return steps_; }
  double horizon() const { return dt_ * steps_; }
  double time(int k) const { return k * dt_; }

 private:
  double dt_;
  int steps_;
};

}  // namespace hjfund

#endif
