#include <doctest.h>

#include <random>

#include "hjfund/domain.hpp"

using namespace hjfund;

TEST_CASE("displacement takes the shorter signed arc") {
  PeriodicGrid g(10, 1.0);
  CHECK(g.displacement(0.1, 0.3) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(g.displacement(0.9, 0.1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(g.displacement(0.0, 0.5) == doctest::Approx(0.5));  // tie resolves positive
  CHECK(g.displacement(0.5, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("displacement properties on random pairs") {
  PeriodicGrid g(10, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int it = 0; it < 2000; ++it) {
    double a = unif(rng), b = unif(rng);
    double d = g.displacement(a, b);
    CHECK(std::fabs(d) <= 0.5 + 1e-15);
    if (std::fabs(std::fabs(d) - 0.5) > 1e-12)  // antisymmetric away from the tie
      CHECK(g.displacement(b, a) == doctest::Approx(-d).epsilon(1e-12));
    // b == a + d (mod length)
    double wrapped = std::fmod(a + d - b, 1.0);
    if (wrapped < -0.5) wrapped += 1.0;
    if (wrapped > 0.5) wrapped -= 1.0;
    CHECK(std::fabs(wrapped) < 1e-12);
  }
}

TEST_CASE("neighborhood windows") {
  PeriodicGrid g(8, 1.0);
  CHECK(g.neighborhood(0, 1) == std::vector<int>{7, 0, 1});
  CHECK(g.neighborhood(3, 0) == std::vector<int>{3});
  auto full = g.neighborhood(0, 4);
  CHECK(full.size() == 8);  // antipodal tie node included once
  CHECK(full == std::vector<int>{5, 6, 7, 0, 1, 2, 3, 4});
  CHECK_THROWS_AS(g.neighborhood(0, 5), std::invalid_argument);
}

TEST_CASE("neighborhood size is 2r+1 clipped to n") {
  PeriodicGrid g(9, 1.0);
  for (int r = 0; r <= 4; ++r) CHECK(g.neighborhood(2, r).size() == size_t(2 * r + 1));
  CHECK_THROWS_AS(g.neighborhood(2, 5), std::invalid_argument);
}

TEST_CASE("node arithmetic and nearest node") {
  PeriodicGrid g(4, 2.0);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.node(5) == doctest::Approx(0.5));
  CHECK(g.wrap(-1) == 3);
  CHECK(g.nearest_node(1.74) == 3);
  CHECK(g.nearest_node(1.9) == 0);
  CHECK(g.nearest_node(-0.2) == 0);  // reduces mod length first
}

TEST_CASE("time grid uses index arithmetic") {
  TimeGrid t(0.1, 10);
  CHECK(t.horizon() == doctest::Approx(1.0));
  CHECK(t.time(7) == doctest::Approx(0.7));
  CHECK(t.time(3) == 3 * 0.1);  // exactly k*dt, no accumulation
  CHECK_THROWS_AS(TimeGrid(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.1, 0), std::invalid_argument);
}
