#include "swarmcov/domains.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarmcov {

BoxDomain::BoxDomain(Point lo_, Point hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.size() < 1 || lo.size() > kMaxDim) {
    throw UsageError("box bounds must have matching dimension in 1..3");
  }
  if (!lo.allFinite() || !hi.allFinite()) throw UsageError("box bounds must be finite");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw UsageError("box requires lo < hi on every axis");
  }
}

double BoxDomain::volume() const { return (hi - lo).prod(); }

bool BoxDomain::contains(const Point& x) const {
  if (x.size() != lo.size()) return false;
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

double SphereDomain::area() { return 4.0 * std::numbers::pi; }

bool SphereDomain::contains(const Point& x, double tol) const {
  return x.size() == 3 && std::abs(x.norm() - 1.0) <= tol;
}

Point reflect(const BoxDomain& box, const Point& x) {
  if (!x.allFinite()) throw UsageError("reflect: non-finite point");
  if (x.size() != box.lo.size()) throw UsageError("reflect: dimension mismatch");
  Point y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double lo = box.lo[i];
    const double w = box.hi[i] - lo;
    double t = x[i] - lo;
    if (t >= 0.0 && t <= w) continue;
    // The fold is periodic with period 2w: map into [0, 2w) then mirror the upper half.
    t = std::fmod(t, 2.0 * w);
    if (t < 0.0) t += 2.0 * w;
    if (t > w) t = 2.0 * w - t;
    y[i] = std::clamp(lo + t, lo, box.hi[i]);
  }
  return y;
}

Point retract(const SphereDomain&, const Point& x) {
  const double n = x.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("retract: cannot normalize a zero or non-finite vector");
  return x / n;
}

double geodesic_distance(const SphereDomain&, const Point& x, const Point& y) {
  return std::acos(std::clamp(x.dot(y), -1.0, 1.0));
}

Point confine(const Domain& domain, const Point& x) {
  return std::visit(
      [&](const auto& d) -> Point {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BoxDomain>) {
          return reflect(d, x);
        } else {
          return retract(d, x);
        }
      },
      domain);
}

bool contains(const Domain& domain, const Point& x) {
  return std::visit([&](const auto& d) { return d.contains(x); }, domain);
}

double measure(const Domain& domain) {
  if (const auto* box = std::get_if<BoxDomain>(&domain)) return box->volume();
  return SphereDomain::area();
}

int ambient_dim(const Domain& domain) {
  return std::visit([](const auto& d) { return d.dim(); }, domain);
}

BoxDomain bounding_box(const Domain& domain) {
  if (const auto* box = std::get_if<BoxDomain>(&domain)) return *box;
  return BoxDomain(make_point({-1.0, -1.0, -1.0}), make_point({1.0, 1.0, 1.0}));
}

}  // namespace swarmcov
