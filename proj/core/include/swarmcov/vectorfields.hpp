#pragma once

#include "swarmcov/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swarmcov {

/// Default step for central-difference Lie brackets.
inline constexpr double kBracketStep = 1e-4;
/// Singular values below this fraction of the largest do not count toward rank.
inline constexpr double kRankTolerance = 1e-8;

/// Smooth vector field given by its coefficient map, optionally with a closed-form flow.
/// Immutable once built; evaluation is thread safe as long as the closures are.
struct VectorField {
  std::string name;
  int dim = 0;
  std::function<Point(const Point&)> eval;
  /// exact_flow(x, t) = e^{tX} x. Empty when no closed form is known.
  std::function<Point(const Point&, double)> exact_flow;

  bool has_exact_flow() const { return static_cast<bool>(exact_flow); }
  Point operator()(const Point& x) const { return eval(x); }
};

/// Ordered control family {X_1, ..., X_m}. m may be smaller than dim.
struct FieldFamily {
  std::string name;
  int dim = 0;
  std::vector<VectorField> fields;

  std::size_t size() const { return fields.size(); }
  const VectorField& operator[](std::size_t i) const { return fields[i]; }
  bool all_exact_flows() const;
};

/// Checked evaluation; throws UsageError on dimension mismatch or non-finite input.
Point evaluate(const VectorField& field, const Point& x);

/// Central-difference approximation of [X,Y](x) = DY(x) X(x) - DX(x) Y(x).
/// Directional derivatives are taken along X(x) and Y(x), so the error is O(h^2) for smooth fields.
Point lie_bracket_numeric(const VectorField& X, const VectorField& Y, const Point& x,
                          double h = kBracketStep);

/// The bracket [X,Y] packaged as a field, evaluated numerically on demand.
VectorField bracket_field(const VectorField& X, const VectorField& Y, double h = kBracketStep);

/// Projects ambient vectors at x onto the tangent space of a manifold.
using TangentProjector = std::function<Eigen::MatrixXd(const Point&)>;

struct RankReport {
  int rank = 0;
  std::vector<double> singular_values;
  /// Set when nested differencing is deep enough that roundoff may approach the rank threshold.
  std::optional<std::string> warning;
};

/// Numerical rank of span(V^0 ∪ ... ∪ V^depth)(x) where V^0 is the family and
/// V^i = {[X, Y] : X in V^0, Y in V^{i-1}}.
RankReport bracket_generating_rank(const FieldFamily& family, const Point& x, int depth,
                                   const TangentProjector& projector = {});

/// I - x x^T / |x|^2, the tangent projector of the unit sphere.
Eigen::MatrixXd sphere_tangent_projector(const Point& x);

/// X_1 = d/dx1 - x2 d/dx3, X_2 = d/dx2 + x1 d/dx3 on R^3.
FieldFamily builtin_brockett();
/// {X̃_1, X̃_2} on S^2 generated by the rotation matrices B_1, B_2.
FieldFamily builtin_sphere();
/// Coordinate frame d/dx_1, ..., d/dx_dim.
FieldFamily builtin_coordinate(int dim);

/// Rotation generator B_i (i in 1..3) of the sphere system.
Eigen::Matrix3d sphere_generator(int i);
/// The linear field x -> B_i x with its rotation flow.
VectorField sphere_field(int i);

/// Lookup by scenario name: "brockett", "sphere", "coordinate".
FieldFamily builtin_family(std::string_view name, int dim);

}  // namespace swarmcov
