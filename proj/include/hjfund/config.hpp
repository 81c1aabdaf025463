#ifndef HJFUND_CONFIG_HPP
#define HJFUND_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjfund/characteristics.hpp"
#include "hjfund/critical.hpp"
#include "hjfund/hamiltonian.hpp"
#include "hjfund/longtime.hpp"
#include "hjfund/propagator.hpp"

namespace hjfund {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses the restricted expression grammar
///     A | A + B*cos(2*pi*k*x) | B*cos(2*pi*k*x) | table:<path>
/// ("k*" may be omitted for k = 1; "-" accepted between terms). Table files
/// hold one sample per line, uniformly spaced over [0, length).
Potential parse_expression(const std::string& text, double length);

struct PinnedSection {
  double x0 = 0.0;
  double u0 = 0.0;
};

struct ShootSection {
  double x0 = 0.0;
  double u0 = 0.0;
  double target_x = 0.0;
  double t = 1.0;
  ShootParams params{};
};

struct CriticalSection {
  std::vector<double> c_values;
  std::optional<double> c_lo, c_hi;
  double horizon_T = 50.0;
  int max_bisect = 20;
  DriftOptions drift{};
};

struct OutputSection {
  std::string directory = ".";
  bool csv = true;
  bool json = true;
  int stride = 1;
};

/// Strictly validated run configuration: a single JSON document, unknown keys
/// anywhere are a validation error listing the offending paths.
struct RunConfig {
  nlohmann::json raw;

  // present flags for the optional sections
  bool has_model = false, has_grid = false, has_time = false, has_initial = false;
  bool has_pinned = false, has_shoot = false, has_critical = false, has_longtime = false;
  bool has_barrier = false;

  double kinetic_coefficient = 1.0;
  double u_coupling = 0.0;
  std::string potential_text = "0";
  double shift = 0.0;

  int grid_n = 0;
  double grid_length = 1.0;

  double dt = 0.0;
  double horizon = 0.0;
  int steps = 0;

  SchemeOptions scheme{};
  double picard_tol = 1e-10;
  int picard_max_iter = 200;

  std::string phi_text;
  PinnedSection pinned{};
  ShootSection shoot{};
  CriticalSection critical{};
  LongtimeOptions longtime{};
  PinnedSection barrier_src{};
  OutputSection output{};

  static RunConfig parse(const nlohmann::json& doc);
  static RunConfig load(const std::string& path);

  HamiltonianModel model() const;
  PeriodicGrid grid() const;
  TimeGrid tgrid() const;
  ValueField phi_field() const;

  void require(const std::string& section) const;
};

}  // namespace hjfund

#endif
