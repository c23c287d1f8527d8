#pragma once

#include "swarmcov/domains.hpp"
#include "swarmcov/types.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace swarmcov {

/// Uniform structured grid over a box, or an equal-area (z, phi) grid over S^2.
/// Cell index is row-major with axis 0 fastest.
class Grid {
 public:
  enum class Kind { Box, Sphere };

  Grid() = default;
  static Grid box(const BoxDomain& domain, std::vector<int> cells);
  /// Equal-area cells: z = cos(theta) in [-1, 1] split into nz bands, phi in [0, 2pi) into nphi sectors.
  static Grid sphere(int nz, int nphi);
  /// Box grid over the domain, or a sphere grid with cells_per_axis bands and 2x sectors.
  static Grid over(const Domain& domain, int cells_per_axis);

  Kind kind() const { return kind_; }
  int axes() const { return static_cast<int>(cells_.size()); }
  int cells(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const { return size_; }
  /// Parameter-space box: the domain for box grids, [-1,1] x [0,2pi] for sphere grids.
  const BoxDomain& parameter_box() const { return param_; }
  double spacing(int axis) const;
  /// Volume (box) or area (sphere) of each cell.
  double cell_volume() const { return cell_volume_; }

  /// Parameter coordinates of an ambient point.
  Point to_parameter(const Point& x) const;
  Point from_parameter(const Point& p) const;
  std::optional<std::size_t> locate(const Point& x) const;
  /// Like locate() but clamps out-of-range points to the nearest boundary cell.
  std::size_t locate_clamped(const Point& x, bool* was_clamped = nullptr) const;
  Point cell_center(std::size_t index) const;
  /// Parameter-space corners of a cell.
  BoxDomain cell_box(std::size_t index) const;
  std::array<int, 3> unravel(std::size_t index) const;

  bool operator==(const Grid& other) const;

 private:
  Kind kind_ = Kind::Box;
  std::vector<int> cells_;
  std::size_t size_ = 0;
  BoxDomain param_;
  double cell_volume_ = 0.0;
};

/// Cell-averaged density on a grid.
struct GridField {
  Grid grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(Grid g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}
  GridField(Grid g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double mass() const;
  double min() const;
  bool all_finite() const;
};

}  // namespace swarmcov
