#include "swarmcov/meanfield.hpp"
#include "swarmcov/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace swarmcov;

namespace {

// Reciprocal kernel integrals, frozen from the Cartesian and polar sums below.
constexpr double kC1d = 2.2522836210435817;       // eps = 1, dim 1
constexpr double kC3dEps5 = 0.018136933916866615; // eps = 5, dim 3
constexpr double kCSphere = 214.44995628015354;   // eps = 0.1 on S^2

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Midpoint sum over [-eps, eps]^dim. The integrand is smooth with compact
// support, so the sum converges faster than any power of the spacing.
double cartesian_oracle(double eps, int dim, int n) {
  const double h = 2.0 / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + (i + 0.5) * h;
    if (dim == 1) {
      sum += bump(x * x);
      continue;
    }
    for (int j = 0; j < n; ++j) {
      const double y = -1.0 + (j + 0.5) * h;
      if (dim == 2) {
        sum += bump(x * x + y * y);
        continue;
      }
      for (int k = 0; k < n; ++k) {
        const double z = -1.0 + (k + 0.5) * h;
        sum += bump(x * x + y * y + z * z);
      }
    }
  }
  return 1.0 / (sum * std::pow(h * eps, dim));
}

// 2 pi * integral_0^eps bump(theta / eps) sin(theta) dtheta by the trapezoid rule.
double sphere_oracle(double eps, int n) {
  const double h = eps / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * bump((t / eps) * (t / eps)) * std::sin(t);
  }
  return 1.0 / (2.0 * std::numbers::pi * sum * h);
}

std::vector<Point> random_points(const BoxDomain& box, std::size_t n, std::uint64_t seed) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng(seed, i, 0, StreamPurpose::Test);
    Point p(box.dim());
    for (int a = 0; a < box.dim(); ++a) p[a] = box.lo[a] + box.width(a) * rng.uniform();
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("independent oracles reproduce the frozen constants") {
  CHECK(cartesian_oracle(1.0, 1, 4000) == doctest::Approx(kC1d).epsilon(1e-10));
  CHECK(cartesian_oracle(5.0, 3, 160) == doctest::Approx(kC3dEps5).epsilon(1e-8));
  CHECK(sphere_oracle(0.1, 200000) == doctest::Approx(kCSphere).epsilon(1e-9));
}

TEST_CASE("normalization constants") {
  CHECK(Kernel::euclidean(1.0, 1).normalization() == doctest::Approx(kC1d).epsilon(1e-10));
  CHECK(Kernel::euclidean(5.0, 3).normalization() == doctest::Approx(kC3dEps5).epsilon(1e-10));
  CHECK(Kernel::sphere(0.1).normalization() == doctest::Approx(kCSphere).epsilon(1e-10));
  CHECK(Kernel::euclidean(0.3, 2).normalization() == doctest::Approx(cartesian_oracle(0.3, 2, 600)).epsilon(1e-9));
}

TEST_CASE("normalization scales as eps^-dim") {
  for (int dim = 1; dim <= 3; ++dim) {
    const double c1 = Kernel::euclidean(1.0, dim).normalization();
    for (double eps : {0.01, 0.5, 7.0}) {
      CHECK(Kernel::euclidean(eps, dim).normalization() == doctest::Approx(c1 / std::pow(eps, dim)).epsilon(1e-10));
    }
  }
}

TEST_CASE("non-positive eps is rejected") {
  CHECK_THROWS_AS(Kernel::euclidean(0.0, 3), UsageError);
  CHECK_THROWS_AS(Kernel::euclidean(-1.0, 1), UsageError);
  CHECK_THROWS_AS(normalization_constant(KernelKind::EuclideanBump, 0.0, 2), UsageError);
}

TEST_CASE("kernel values") {
  const Kernel k = Kernel::euclidean(1.0, 3);
  const Point o = make_point({0, 0, 0});
  CHECK(kernel_value(k, o, o) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_value(k, o, make_point({1.0 / std::sqrt(2.0), 0, 0})) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(kernel_value(k, o, make_point({1, 0, 0})) == 0.0);
  CHECK(kernel_value(k, o, make_point({0.8, 0.8, 0})) == 0.0);

  const Kernel s = Kernel::sphere(0.5);
  const Point n = make_point({0, 0, 1});
  CHECK(kernel_value(s, n, n) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const Point at = make_point({std::sin(0.25), 0, std::cos(0.25)});
  CHECK(kernel_value(s, n, at) == doctest::Approx(std::exp(-1.0 / 0.75)).epsilon(1e-12));
  CHECK(kernel_value(s, n, make_point({std::sin(0.6), 0, std::cos(0.6)})) == 0.0);
}

TEST_CASE("kde basics") {
  const Domain box = BoxDomain(make_point({0, 0}), make_point({10, 10}));
  const Kernel k = Kernel::euclidean(1.0, 2);
  const std::vector<Point> empty;
  CHECK(kde(k, box, empty, 10, make_point({5, 5})) == 0.0);

  const std::vector<Point> one{make_point({5, 5})};
  CHECK(kde(k, box, one, 1, make_point({6.5, 5})) == 0.0);
  const double single = kde(k, box, one, 1, make_point({5, 5}));
  CHECK(single == doctest::Approx(k.normalization() * std::exp(-1.0)).epsilon(1e-14));

  const std::vector<Point> two{make_point({5, 5}), make_point({5, 5})};
  CHECK(kde(k, box, two, 2, make_point({5, 5})) == doctest::Approx(single).epsilon(1e-15));
  // n_total counts agents that are not in the positions list
  CHECK(kde(k, box, one, 4, make_point({5, 5})) == doctest::Approx(single / 4.0).epsilon(1e-15));
}

TEST_CASE("single-particle kde integrates to one") {
  const BoxDomain b(make_point({0, 0}), make_point({4, 4}));
  const Kernel k = Kernel::euclidean(0.7, 2);
  const std::vector<Point> one{make_point({1.9, 2.2})};
  const KdeIndex index(k, b, one, 1);
  const int n = 400;
  const double h = 4.0 / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mass += index.density(make_point({(i + 0.5) * h, (j + 0.5) * h}));
  CHECK(mass * h * h == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hashed kde equals brute force") {
  for (int dim = 1; dim <= 3; ++dim) {
    Point lo(dim), hi(dim);
    for (int a = 0; a < dim; ++a) {
      lo[a] = -2.0;
      hi[a] = 3.0 + a;
    }
    const BoxDomain b(lo, hi);
    const Kernel k = Kernel::euclidean(0.6, dim);
    const auto pts = random_points(b, 700, 10 + static_cast<std::uint64_t>(dim));
    const KdeIndex index(k, b, pts, 1000);
    for (const Point& q : random_points(b, 200, 20 + static_cast<std::uint64_t>(dim))) {
      double brute = 0.0;
      for (const Point& p : pts) brute += k.value(q, p);
      brute *= k.normalization() / 1000.0;
      CHECK(index.density(q) == doctest::Approx(brute).epsilon(1e-12));
    }
  }
  SUBCASE("sphere") {
    const Kernel k = Kernel::sphere(0.3);
    std::vector<Point> pts;
    for (std::uint64_t i = 0; i < 800; ++i) {
      StreamRng rng(31, i, 0, StreamPurpose::Test);
      Point p = make_point({rng.normal(), rng.normal(), rng.normal()});
      pts.push_back(p / p.norm());
    }
    const KdeIndex index(k, SphereDomain{}, pts, pts.size());
    for (std::size_t q = 0; q < 100; ++q) {
      double brute = 0.0;
      for (const Point& p : pts) brute += k.value(pts[q], p);
      brute *= k.normalization() / static_cast<double>(pts.size());
      CHECK(index.density(pts[q]) == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("kde is linear in the particle set") {
  const BoxDomain b(make_point({0, 0}), make_point({5, 5}));
  const Kernel k = Kernel::euclidean(0.8, 2);
  const auto a = random_points(b, 300, 41), c = random_points(b, 200, 42);
  std::vector<Point> both = a;
  both.insert(both.end(), c.begin(), c.end());
  for (const Point& q : random_points(b, 50, 43)) {
    const double lhs = kde(k, b, both, 500, q);
    const double rhs = kde(k, b, a, 500, q) + kde(k, b, c, 500, q);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("density_until") {
  const BoxDomain b(make_point({0}), make_point({1}));
  const Kernel k = Kernel::euclidean(0.2, 1);
  const auto pts = random_points(b, 500, 51);
  const KdeIndex index(k, b, pts, 500);
  for (const Point& q : random_points(b, 50, 52)) {
    const double full = index.density(q);
    CHECK(index.density_until(q, full * 2.0 + 1.0) == doctest::Approx(full).epsilon(1e-14));
    CHECK(index.density_until(q, full * 0.5) >= full * 0.5);
  }
}

TEST_CASE("reaction functions and transition rates") {
  const ReactionFunctions r{500.0};
  CHECK(r.r1(-0.2) == doctest::Approx(100.0));
  CHECK(r.r2(-0.2) == 0.0);
  CHECK(r.r1(0.0) == 0.0);
  CHECK(r.r2(0.0) == 0.0);
  CHECK(r.r1(0.1) == 0.0);
  CHECK(r.r2(0.1) == doctest::Approx(50.0));

  const TransitionRates a = transition_rates(r, 0.3, 0.5);
  CHECK(a.stop == doctest::Approx(100.0));
  CHECK(a.resume == 0.0);
  const TransitionRates eq = transition_rates(r, 0.5, 0.5);
  CHECK(eq.stop == 0.0);
  CHECK(eq.resume == 0.0);
  const TransitionRates b = transition_rates(r, 0.6, 0.5);
  CHECK(b.stop == 0.0);
  CHECK(b.resume == doctest::Approx(50.0));

  const ReactionFunctions capped{1e9, 1e6};
  CHECK(capped.r1(-1.0) == 1e6);
  CHECK(capped.r2(1.0) == 1e6);
}

TEST_CASE("reaction functions are Lipschitz with constant k and never both positive") {
  const ReactionFunctions r{37.0};
  StreamRng rng(61, 0, 0, StreamPurpose::Test);
  for (int i = 0; i < 2000; ++i) {
    const double s = 4.0 * rng.uniform() - 2.0, t = 4.0 * rng.uniform() - 2.0;
    CHECK(std::abs(r.r1(s) - r.r1(t)) <= 37.0 * std::abs(s - t) + 1e-12);
    CHECK(std::abs(r.r2(s) - r.r2(t)) <= 37.0 * std::abs(s - t) + 1e-12);
    CHECK(r.r1(s) * r.r2(s) == 0.0);
    CHECK(r.r1(s) >= 0.0);
    CHECK(r.r2(s) >= 0.0);
  }
}
