#pragma once

#include "swarmcov/types.hpp"

#include <variant>

namespace swarmcov {

/// Axis-aligned box with reflecting walls.
struct BoxDomain {
  Point lo;
  Point hi;

  BoxDomain() = default;
  BoxDomain(Point lo_, Point hi_);  // validates lo < hi componentwise

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  double width(int axis) const { return hi[axis] - lo[axis]; }
  bool contains(const Point& x) const;
};

/// The unit sphere S^2 in R^3. No boundary.
struct SphereDomain {
  static constexpr double kMembershipTol = 1e-9;
  static constexpr int dim() { return 3; }
  static double area();
  bool contains(const Point& x, double tol = kMembershipTol) const;
};

using Domain = std::variant<BoxDomain, SphereDomain>;

/// Per-axis specular fold of x into [lo, hi]. Interior points are returned unchanged.
Point reflect(const BoxDomain& box, const Point& x);

/// x / |x|. Throws NumericalError for the zero vector.
Point retract(const SphereDomain& sphere, const Point& x);

/// arccos(clamp(x.y, -1, 1)).
double geodesic_distance(const SphereDomain& sphere, const Point& x, const Point& y);

/// reflect() for boxes, retract() for the sphere.
Point confine(const Domain& domain, const Point& x);
bool contains(const Domain& domain, const Point& x);
/// Lebesgue volume of the box or area of the sphere.
double measure(const Domain& domain);
int ambient_dim(const Domain& domain);
/// Axis-aligned bounding box of the domain in ambient coordinates.
BoxDomain bounding_box(const Domain& domain);

}  // namespace swarmcov
