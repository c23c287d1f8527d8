#pragma once

#include "swarmcov/domains.hpp"
#include "swarmcov/grid.hpp"
#include "swarmcov/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swarmcov {

using ScalarFn = std::function<double(const Point&)>;

/// Midpoint quadrature over a parameter box with local refinement where the
/// integrand jumps. Cells whose corner and centre samples differ by more than
/// 10% of their magnitude are split in half along every axis, up to max_depth times.
double integrate_adaptive(const BoxDomain& box, const ScalarFn& fn, const std::vector<int>& coarse_cells,
                          int max_depth);

/// Integral over a domain (volume measure for boxes, area measure for the sphere).
double integrate_over(const Domain& domain, const ScalarFn& fn);

/// Normalized target probability density y^d on a domain.
class TargetDensity {
 public:
  /// Accepted deviation of the quadrature mass from 1.
  static constexpr double kMassTolerance = 1e-3;

  /// `shape` need not be normalized. If `analytic_mass` is given it fixes the
  /// normalization; quadrature then only verifies it.
  TargetDensity(std::string name, Domain domain, ScalarFn shape, std::optional<double> analytic_mass,
                std::string support, std::optional<double> infimum = std::nullopt,
                std::optional<std::vector<int>> quadrature_cells = std::nullopt);

  double operator()(const Point& x) const { return scale_ * shape_(x); }

  const std::string& name() const { return name_; }
  const std::string& support() const { return support_; }
  const Domain& domain() const { return domain_; }
  /// Normalization constant c with y^d = c * shape.
  double normalization() const { return scale_; }
  /// Quadrature of y^d over the domain, measured at construction.
  double quadrature_mass() const { return quadrature_mass_; }
  /// Known lower bound of y^d on the domain, if any.
  std::optional<double> infimum() const { return infimum_; }

 private:
  std::string name_;
  Domain domain_;
  ScalarFn shape_;
  std::string support_;
  double scale_ = 1.0;
  double quadrature_mass_ = 0.0;
  std::optional<double> infimum_;
};

enum class BumpProfile { Flat, RaisedCosine };

/// Uniform density 1/|Omega|.
TargetDensity make_uniform_target(const Domain& domain);

/// c [ sum_i bump(|x - center_i| / radius) + floor ]. Balls must be disjoint and inside the box.
TargetDensity make_balls_target(const BoxDomain& box, std::vector<Point> centers, double radius,
                                double floor, BumpProfile profile = BumpProfile::Flat);

/// Eight flat balls centred at the {1/4, 3/4}^3 lattice of a cube, radius width/8.
TargetDensity make_balls8_target(const BoxDomain& box, double floor);

/// c on the six caps x_i^2 >= threshold of S^2, zero elsewhere.
TargetDensity make_sphere_caps_target(double threshold = 0.75);

/// Proportional to 1 + amplitude * sin(2 pi wavenumber (x_1 - lo_1) / width_1).
TargetDensity make_sinusoid_target(const BoxDomain& box, double amplitude, int wavenumber);

/// Piecewise constant on a box grid; values are renormalized to unit mass.
TargetDensity make_grid_target(const Grid& grid, std::vector<double> values);

/// Cell averages of y^d, sampled at subsamples^axes points per cell.
GridField project_target(const TargetDensity& target, const Grid& grid, int subsamples = 6);

}  // namespace swarmcov
