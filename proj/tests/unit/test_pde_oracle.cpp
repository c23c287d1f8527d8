#include "swarmcov/pde_oracle.hpp"
#include "swarmcov/rng.hpp"
#include "swarmcov/target.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace swarmcov;

namespace {

const double kPi = std::numbers::pi;

Grid unit_grid(int n) { return Grid::box(BoxDomain(make_point({0}), make_point({1})), {n}); }

GridField random_field(const Grid& g, double lo, double hi, std::uint64_t seed) {
  GridField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    StreamRng rng(seed, i, 0, StreamPurpose::Test);
    f.values[i] = lo + (hi - lo) * rng.uniform();
  }
  return f;
}

// Max error against the exact cell averages of 1 + 0.5 e^{-pi^2 t} cos(pi x).
double heat_mode_error(int n, double t_final) {
  const Grid g = unit_grid(n);
  const double h = 1.0 / n;
  GridField y(g);
  auto avg_cos = [&](std::size_t i) { return (std::sin(kPi * (i + 1) * h) - std::sin(kPi * i * h)) / (kPi * h); };
  for (std::size_t i = 0; i < y.size(); ++i) y.values[i] = 1.0 + 0.5 * avg_cos(i);
  const auto coef = CoefficientPair::laplacian(g);
  const TwoStateField out = run_linear(y, coef, 0.2 * h * h, t_final, 1000000);
  double err = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    err = std::max(err, std::abs(out.moving.values[i] - (1.0 + 0.5 * std::exp(-kPi * kPi * t_final) * avg_cos(i))));
  }
  return err;
}

}  // namespace

TEST_CASE("constants are stationary for the heat equation") {
  const Grid g = unit_grid(50);
  const GridField y(g, 1.0);
  const GridField z = step_linear(y, CoefficientPair::laplacian(g), 1e-4);
  CHECK(z.values == y.values);
}

TEST_CASE("the equilibrium density is stationary") {
  const Grid g = Grid::box(BoxDomain(make_point({0, 0}), make_point({1, 2})), {20, 30});
  const GridField f = random_field(g, 0.2, 3.0, 1);
  const auto coef = CoefficientPair::for_equilibrium(f, 0.7);
  const GridField z = step_linear(f, coef, 0.9 * linear_stability_bound(coef));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(z.values[i] == doctest::Approx(f.values[i]).epsilon(1e-13));
}

TEST_CASE("step size above the stability bound is rejected") {
  const Grid g = unit_grid(100);
  const auto coef = CoefficientPair::laplacian(g);
  const double bound = linear_stability_bound(coef);
  CHECK(bound == doctest::Approx(0.5e-4));
  CHECK_THROWS_WITH_AS(step_linear(GridField(g, 1.0), coef, 2.0 * bound), doctest::Contains("stability bound"),
                       UsageError);
  CHECK_THROWS_AS(step_linear(GridField(g, 1.0), coef, 0.0), UsageError);
}

TEST_CASE("explicit scheme conserves mass and keeps densities non-negative") {
  for (const Grid& g : {unit_grid(37), Grid::box(BoxDomain(make_point({0, 0}), make_point({2, 1})), {16, 9})}) {
    GridField y = random_field(g, 0.0, 1.0, 2);
    for (std::size_t i = 0; i < y.size(); i += 3) y.values[i] = 0.0;
    CoefficientPair coef{random_field(g, 0.5, 2.0, 3), random_field(g, 0.1, 1.0, 4)};
    const double m0 = y.mass();
    const double dt = linear_stability_bound(coef);
    for (int n = 0; n < 500; ++n) {
      y = step_linear(y, coef, dt);
      REQUIRE(y.min() >= 0.0);
    }
    CHECK(std::abs(y.mass() - m0) <= 1e-12 * m0);
  }
}

TEST_CASE("heat equation converges at second order in space") {
  const double e25 = heat_mode_error(25, 0.1);
  const double e50 = heat_mode_error(50, 0.1);
  const double e100 = heat_mode_error(100, 0.1);
  CHECK(e25 / e50 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e50 / e100 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("linear runs land on the final time") {
  const Grid g = unit_grid(10);
  int calls = 0;
  double last = -1.0;
  run_linear(GridField(g, 1.0), CoefficientPair::laplacian(g), 3e-3, 0.1, 5, [&](const OracleSnapshot& s) {
    ++calls;
    last = s.time;
  });
  // 34 steps of 0.1/34: initial, every 5th step, and the final one
  CHECK(calls == 1 + 6 + 1);
  CHECK(last == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("single-cell reaction matches the closed-form solution") {
  // y2' = k (a - y2)(b - y2) with a = 0.6 the target and b = 0.7 the total mass
  const Grid g = unit_grid(1);
  const double a = 0.6, b = 0.7, k = 1.0;
  const GridField target(g, a);
  const ReactionFunctions r{k};
  TwoStateField s{GridField(g, 0.5), GridField(g, 0.2)};
  const double dt = 1e-3;
  double prev = 0.2;
  for (int n = 1; n <= 3000; ++n) {
    s = step_semilinear(s.moving, s.motionless, target, r, dt);
    const double y2 = s.motionless.values[0];
    REQUIRE(y2 > prev);
    REQUIRE(y2 < a);
    prev = y2;
    if (n % 500 == 0) {
      const double R = (b - 0.2) / (a - 0.2) * std::exp((b - a) * k * n * dt);
      CHECK(y2 == doctest::Approx((b - a * R) / (1.0 - R)).epsilon(1e-6));
    }
    REQUIRE(s.mass() == doctest::Approx(b).epsilon(1e-14));
  }
}

TEST_CASE("single-cell reaction converges at second order in dt") {
  const Grid g = unit_grid(1);
  const GridField target(g, 0.6);
  auto error_at = [&](double dt) {
    TwoStateField s{GridField(g, 0.5), GridField(g, 0.2)};
    const int steps = static_cast<int>(std::lround(1.5 / dt));
    for (int n = 0; n < steps; ++n) s = step_semilinear(s.moving, s.motionless, target, ReactionFunctions{1.0}, dt);
    const double R = 1.25 * std::exp(0.1 * 1.5);
    return std::abs(s.motionless.values[0] - (0.7 - 0.6 * R) / (1.0 - R));
  };
  const double e1 = error_at(0.02), e2 = error_at(0.01), e3 = error_at(0.005);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("reaching the target with nothing moving is a fixed point") {
  const Grid g = unit_grid(40);
  const GridField target = project_target(make_sinusoid_target(BoxDomain(make_point({0}), make_point({1})), 0.5, 1), g);
  const TwoStateField out = step_semilinear(GridField(g, 0.0), target, target, ReactionFunctions{50.0}, 1e-4);
  CHECK(out.moving.values == GridField(g, 0.0).values);
  CHECK(out.motionless.values == target.values);
}

TEST_CASE("semilinear scheme conserves mass and positivity from random data") {
  const Grid g = Grid::box(BoxDomain(make_point({0, 0}), make_point({1, 1})), {12, 12});
  GridField target = random_field(g, 0.0, 2.0, 5);
  const double tm = target.mass();
  for (double& v : target.values) v /= tm;
  TwoStateField s{random_field(g, 0.0, 1.0, 6), random_field(g, 0.0, 1.0, 7)};
  const double m0 = s.mass();
  const auto lap = CoefficientPair::laplacian(g, 0.01);
  const double dt = 1e-3;
  for (int n = 0; n < 400; ++n) {
    s = step_semilinear(s.moving, s.motionless, target, ReactionFunctions{30.0}, dt, lap);
    REQUIRE(s.moving.min() >= 0.0);
    REQUIRE(s.motionless.min() >= 0.0);
  }
  CHECK(std::abs(s.mass() - m0) <= 1e-12 * m0);
}

TEST_CASE("invalid oracle input") {
  const Grid g = unit_grid(10);
  GridField neg(g, 1.0);
  neg.values[3] = -0.5;
  CHECK_THROWS_AS(step_semilinear(neg, GridField(g, 0.0), GridField(g, 1.0), ReactionFunctions{1.0}, 1e-3), UsageError);
  CHECK_THROWS_AS(step_semilinear(GridField(g, 1.0), GridField(unit_grid(11), 0.0), GridField(g, 1.0),
                                  ReactionFunctions{1.0}, 1e-3),
                  UsageError);
  CHECK_THROWS_AS(CoefficientPair::for_equilibrium(GridField(g, 0.0)), ConfigError);
  const Grid g3 = Grid::box(BoxDomain(make_point({0, 0, 0}), make_point({1, 1, 1})), {3, 3, 3});
  CHECK_THROWS_AS(step_linear(GridField(g3, 1.0), CoefficientPair::laplacian(g3), 1e-3), UsageError);
}
