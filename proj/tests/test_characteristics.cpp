#include <doctest.h>

#include <cmath>

#include "hjfund/characteristics.hpp"
#include "hjfund/oracle.hpp"
#include "test_util.hpp"

using namespace hjfund;
using namespace hjfund::testutil;

TEST_CASE("contact system right-hand side") {
  auto down = quadratic(-1.0);  // H = p^2/2 - u
  auto r1 = ode_rhs(down, {0.2, 0.0, 1.0});
  CHECK(r1.dx == doctest::Approx(1.0));
  CHECK(r1.du == doctest::Approx(0.5));
  CHECK(r1.dp == doctest::Approx(1.0));

  auto up = quadratic(+1.0);
  auto r2 = ode_rhs(up, {0.0, 0.0, 1.0});
  CHECK(r2.dx == doctest::Approx(1.0));
  CHECK(r2.du == doctest::Approx(0.5));
  CHECK(r2.dp == doctest::Approx(-1.0));

  auto free_m = kinetic();
  for (double u : {-3.0, 0.0, 4.0}) {
    auto r3 = ode_rhs(free_m, {0.1, u, 2.0});
    CHECK(r3.dp == doctest::Approx(0.0));
    CHECK(r3.du == doctest::Approx(2.0));  // p^2/2 with p = 2
  }
}

TEST_CASE("integration matches the closed-form flows") {
  double t = std::log(2.0);
  {
    auto traj = integrate(quadratic(-1.0), {0.0, 0.0, 1.0}, t, 2000);
    REQUIRE_FALSE(traj.truncated);
    auto fin = traj.states.back();
    CHECK(std::fabs(fin.x - 1.0) <= 1e-8);
    CHECK(std::fabs(fin.u - 1.0) <= 1e-8);
    CHECK(std::fabs(fin.p - 2.0) <= 1e-8);
  }
  {
    auto traj = integrate(quadratic(+1.0), {0.0, 0.0, 1.0}, t, 2000);
    auto fin = traj.states.back();
    CHECK(std::fabs(fin.x - 0.5) <= 1e-8);
    CHECK(std::fabs(fin.u - 0.125) <= 1e-8);
    CHECK(std::fabs(fin.p - 0.5) <= 1e-8);
  }
  {
    auto traj = integrate(kinetic(), {0.0, 0.0, 0.0}, 5.0, 100);
    auto fin = traj.states.back();
    CHECK(fin.x == 0.0);
    CHECK(fin.u == 0.0);
    CHECK(fin.p == 0.0);
  }
}

TEST_CASE("integrator is fourth order") {
  auto m = quadratic(-1.0);
  auto err = [&](int steps) {
    auto fin = integrate(m, {0.0, 0.0, 1.0}, 1.0, steps).states.back();
    double ex = std::exp(1.0);
    return std::fabs(fin.p - ex) + std::fabs(fin.x - (ex - 1.0)) +
           std::fabs(fin.u - 0.5 * (ex * ex - ex));
  };
  double e1 = err(16), e2 = err(32);
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 24.0);
}

TEST_CASE("u-independent flows conserve momentum and grow u") {
  auto m = kinetic();
  auto traj = integrate(m, {0.3, -2.0, 1.7}, 2.0, 200);
  for (const auto& s : traj.states) CHECK(s.p == doctest::Approx(1.7).epsilon(1e-12));
  for (size_t k = 1; k < traj.states.size(); ++k)
    CHECK(traj.states[k].u >= traj.states[k - 1].u - 1e-12);
}

TEST_CASE("divergence guard truncates instead of erroring") {
  auto m = quadratic(-1.0);  // p = p0 e^t blows past any guard eventually
  auto traj = integrate(m, {0.0, 0.0, 5.0}, 30.0, 4000, 1e9);
  CHECK(traj.truncated);
  CHECK(traj.states.size() < 4001);
}

TEST_CASE("shooting the free model finds the resting and winding momenta") {
  PeriodicGrid g(64, 1.0);
  ShootParams params;
  params.p0_max = 3.0;
  params.n_samples = 256;
  auto hits = shoot(kinetic(), 0.0, 0.0, 0.0, 1.0, g, params);
  REQUIRE(!hits.empty());
  // sorted by carried value: rest first (U = 0), then one full winding (U = 1/2)
  CHECK(std::fabs(hits.front().p0) <= 1e-8);
  CHECK(std::fabs(hits.front().final.u) <= 1e-12);
  bool plus = false, minus = false;
  for (const auto& h : hits) {
    if (std::fabs(h.p0 - 1.0) <= 1e-8 && h.winding == 1) {
      plus = true;
      CHECK(h.final.u == doctest::Approx(0.5).epsilon(1e-10));
    }
    if (std::fabs(h.p0 + 1.0) <= 1e-8 && h.winding == -1) minus = true;
  }
  CHECK(plus);
  CHECK(minus);
  for (size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].final.u <= hits[i].final.u);
  for (const auto& h : hits) CHECK(h.hit_error <= params.eps_hit);
}

TEST_CASE("shooting is deterministic") {
  PeriodicGrid g(32, 1.0);
  ShootParams params;
  params.n_samples = 128;
  auto a = shoot(quadratic(-1.0), 0.25, 1.0, 0.5, 0.5, g, params);
  auto b = shoot(quadratic(-1.0), 0.25, 1.0, 0.5, 0.5, g, params);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].p0 == b[i].p0);
    CHECK(a[i].winding == b[i].winding);
    CHECK(a[i].final.u == b[i].final.u);
  }
}

TEST_CASE("shooting cross-checks the pinned dynamic program") {
  // h_{0,1}(0, 1/2) for the growing model: the resting characteristic carries e^t.
  PeriodicGrid g(64, 1.0);
  ShootParams params;
  params.p0_max = 6.0;
  auto hits = shoot(quadratic(-1.0), 0.0, 1.0, 0.0, 0.5, g, params);
  REQUIRE(!hits.empty());
  double min_u = hits.front().final.u;
  CHECK(std::fabs(min_u - std::exp(0.5)) <= 1e-3);

  SchemeOptions opts;
  opts.window_radius = 8;
  TimeGrid t(0.0125, 40);
  auto dp = fundamental_solution(quadratic(-1.0), g, 0, 1.0, t, opts);
  CHECK(std::fabs(dp.field.value(0, t.steps()) - min_u) <= 5e-2);
}

TEST_CASE("min over characteristics agrees with the semigroup") {
  PeriodicGrid g(64, 1.0);
  ShootParams params;
  params.p0_max = 6.0;
  params.n_samples = 256;
  params.threads = 2;

  // flat data on the free model: zero at any node target (resting source)
  {
    auto r = min_over_characteristics(kinetic(), constant_field(g, 0.0), g.node(16), 0.5, params);
    REQUIRE(r.found);
    CHECK(std::fabs(r.value) <= 1e-10);
  }
  // constant data on the decaying model: the scalar ODE
  {
    auto r = min_over_characteristics(quadratic(+1.0), constant_field(g, 1.0), 0.25,
                                      std::log(2.0), params);
    REQUIRE(r.found);
    CHECK(std::fabs(r.value - 0.5) <= 1e-3);
  }
  // wavy data on the growing model against evolve
  {
    auto m = quadratic(-1.0);
    auto phi = make_field(g, [](double x) { return 0.1 * std::cos(kTwoPi * x); });
    TimeGrid t(0.025, 20);
    SchemeOptions opts;
    auto dp = evolve(m, phi, t, opts);
    for (int node : {0, 16, 32, 48}) {
      auto r = min_over_characteristics(m, phi, g.node(node), t.horizon(), params);
      REQUIRE(r.found);
      CHECK(std::fabs(r.value - dp.field.value(node, t.steps())) <= 5e-2);
    }
  }
}

TEST_CASE("backtracked minimizers track the shot characteristic") {
  // positions of the discrete calibrated curve vs the minimizing characteristic
  PeriodicGrid g(64, 1.0);
  auto m = quadratic(-1.0);
  auto phi = make_field(g, [](double x) { return 0.1 * std::cos(kTwoPi * x); });
  TimeGrid t(0.025, 20);
  SchemeOptions opts;
  auto dp = evolve(m, phi, t, opts);
  const int target = 10;  // away from the data's symmetry line, so the minimizer is unique
  auto path = backtrack(dp.field, target, t.steps());

  ShootParams params;
  params.p0_max = 6.0;
  params.n_samples = 256;
  auto r = min_over_characteristics(m, phi, g.node(target), t.horizon(), params);
  REQUIRE(r.found);
  // the characteristic starts where the discrete minimizer starts, up to a node
  CHECK(g.distance(g.node(r.source_node), g.node(path.nodes.front())) <= 3 * g.spacing());
  // and its positions stay close to the discrete path
  auto traj = integrate(m, {g.node(r.source_node), phi[r.source_node], r.best.p0},
                        t.horizon(), t.steps());
  REQUIRE_FALSE(traj.truncated);
  for (int k = 0; k <= t.steps(); ++k) {
    double char_x = traj.states[k].x;
    double path_x = g.node(path.nodes[k]);
    CHECK(g.distance(std::fmod(std::fmod(char_x, 1.0) + 1.0, 1.0), path_x) <= 5e-2);
  }
}
