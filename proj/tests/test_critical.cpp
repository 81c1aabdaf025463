#include <doctest.h>

#include <cmath>

#include "hjfund/critical.hpp"
#include "test_util.hpp"

using namespace hjfund;
using namespace hjfund::testutil;

namespace {

DriftOptions desk_opts() {
  DriftOptions o;
  o.scheme.window_radius = 4;
  return o;
}

}  // namespace

TEST_CASE("the growing model diverges for any tested shift") {
  PeriodicGrid g(64, 1.0);
  ValueField phi = constant_field(g, 1.0);
  auto base = quadratic(-1.0);
  // phi = 1: the sign of 1 + c decides the direction; either way |h| escapes
  auto up = classify_drift(base.with_shift(0.0), phi, 30.0, 1e-2, desk_opts());
  CHECK(up.classification == DriftClass::diverges_up);
  auto up2 = classify_drift(base.with_shift(2.0), phi, 30.0, 1e-2, desk_opts());
  CHECK(up2.classification == DriftClass::diverges_up);
  auto down = classify_drift(base.with_shift(-2.0), phi, 30.0, 1e-2, desk_opts());
  CHECK(down.classification == DriftClass::diverges_down);
}

TEST_CASE("the decaying model is bounded and settles at the shift") {
  PeriodicGrid g(64, 1.0);
  auto rep = classify_drift(quadratic(+1.0, 3.0), constant_field(g, 0.0), 30.0, 1e-2, desk_opts());
  CHECK(rep.classification == DriftClass::bounded);
  CHECK(rep.trailing_sup == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(std::fabs(rep.drift_rate) <= 1e-3);
}

TEST_CASE("mechanical drift equals the shift minus the critical value") {
  PeriodicGrid g(100, 1.0);
  ValueField phi = constant_field(g, 0.0);
  auto base = quadratic_cos(0.0, 1.0);  // H = p^2/2 + cos(2 pi x) - c
  auto at0 = classify_drift(base.with_shift(0.0), phi, 50.0, 1e-2, desk_opts());
  CHECK(at0.classification == DriftClass::diverges_down);
  CHECK(at0.drift_rate == doctest::Approx(-1.0).epsilon(0.05));
  auto at2 = classify_drift(base.with_shift(2.0), phi, 50.0, 1e-2, desk_opts());
  CHECK(at2.classification == DriftClass::diverges_up);
  CHECK(at2.drift_rate == doctest::Approx(1.0).epsilon(0.05));
  // drift differences track shift differences
  auto at05 = classify_drift(base.with_shift(0.5), phi, 50.0, 1e-2, desk_opts());
  CHECK(at05.drift_rate - at0.drift_rate == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("classification never moves from up toward down as c grows") {
  PeriodicGrid g(64, 1.0);
  ValueField phi = constant_field(g, 0.0);
  auto base = quadratic_cos(0.0, 1.0);
  auto rank = [](DriftClass c) {
    return c == DriftClass::diverges_down ? 0 : (c == DriftClass::bounded ? 1 : 2);
  };
  int prev = 0;
  for (double c : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    auto rep = classify_drift(base.with_shift(c), phi, 30.0, 1e-2, desk_opts());
    CHECK(rank(rep.classification) >= prev);
    prev = rank(rep.classification);
  }
}

TEST_CASE("bisection recovers the mechanical critical value") {
  PeriodicGrid g(100, 1.0);
  auto base = quadratic_cos(0.0, 1.0);
  ValueField phi = constant_field(g, 0.0);
  auto res = critical_search(base, phi, 0.0, 2.0, 50.0, 1e-2, 12, desk_opts());
  REQUIRE(res.status == BracketResult::Status::ok);
  CHECK(*res.c_star == doctest::Approx(1.0).epsilon(0.05));
  CHECK(*res.c_star == doctest::Approx(mane_value_frozen(base, 0.0)).epsilon(0.05));
}

TEST_CASE("bisection result does not depend on the initial data") {
  PeriodicGrid g(64, 1.0);
  auto base = quadratic_cos(0.0, 1.0);
  double stars[3];
  int idx = 0;
  for (const ValueField& phi :
       {constant_field(g, 0.0), make_field(g, [](double x) { return std::cos(kTwoPi * x); }),
        random_smooth_field(g, 61, 0.5)}) {
    auto res = critical_search(base, phi, 0.0, 2.0, 40.0, 1e-2, 10, desk_opts());
    REQUIRE(res.status == BracketResult::Status::ok);
    stars[idx++] = *res.c_star;
  }
  CHECK(std::fabs(stars[0] - stars[1]) <= 0.05);
  CHECK(std::fabs(stars[0] - stars[2]) <= 0.05);
}

TEST_CASE("no bracket when every shift drifts the same way") {
  PeriodicGrid g(48, 1.0);
  // decaying model: bounded at both ends
  auto bounded = critical_search(quadratic(+1.0), constant_field(g, 0.0), 0.0, 2.0, 25.0, 1e-2, 8,
                                 desk_opts());
  CHECK(bounded.status == BracketResult::Status::no_bracket);
  CHECK_FALSE(bounded.c_star.has_value());
  // growing model with positive data: up at both ends
  auto divergent = critical_search(quadratic(-1.0), constant_field(g, 1.0), 0.0, 2.0, 25.0, 1e-2,
                                   8, desk_opts());
  CHECK(divergent.status == BracketResult::Status::no_bracket);
}

TEST_CASE("classify_shifts runs shifts independently") {
  PeriodicGrid g(48, 1.0);
  DriftOptions o = desk_opts();
  o.scheme.threads = 2;
  auto rep = classify_shifts(quadratic(-1.0), constant_field(g, 1.0), {-2.0, 0.0, 2.0}, 25.0,
                             1e-2, o);
  REQUIRE(rep.entries.size() == 3);
  for (const auto& e : rep.entries)
    CHECK(e.report.classification != DriftClass::bounded);
}

TEST_CASE("frozen-u Mane values for the quadratic family") {
  CHECK(mane_value_frozen(quadratic_cos(0.0, 1.0), 0.7) == doctest::Approx(1.0));
  CHECK(mane_value_frozen(quadratic(1.0), 2.0) == doctest::Approx(2.0));
  CHECK(mane_value_frozen(quadratic_cos(0.0, 1.0, 1, 0.0, 0.5), 0.0) == doctest::Approx(1.5));
  auto custom = HamiltonianModel::custom(
      [](double, double, double p) { return 0.5 * p * p; }, 10.0);
  CHECK_THROWS_AS(mane_value_frozen(custom, 0.0), std::invalid_argument);
}

TEST_CASE("short horizons are rejected") {
  PeriodicGrid g(32, 1.0);
  CHECK_THROWS_AS(classify_drift(quadratic(0.0), constant_field(g, 0.0), 5.0, 1e-2, desk_opts()),
                  std::invalid_argument);
}
