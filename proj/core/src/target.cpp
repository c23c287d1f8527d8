#include "swarmcov/target.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace swarmcov {

namespace {

double integrate_cell(const BoxDomain& cell, const ScalarFn& fn, int depth) {
  const int d = cell.dim();
  const Point center = 0.5 * (cell.lo + cell.hi);
  const double fc = fn(center);
  if (depth > 0) {
    double lo = fc, hi = fc;
    for (int corner = 0; corner < (1 << d); ++corner) {
      Point p = cell.lo;
      for (int a = 0; a < d; ++a) {
        if (corner & (1 << a)) p[a] = cell.hi[a];
      }
      const double f = fn(p);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    if (hi - lo > 0.1 * std::max(std::abs(hi), std::abs(lo))) {
      double sum = 0.0;
      for (int child = 0; child < (1 << d); ++child) {
        Point clo = cell.lo, chi = center;
        for (int a = 0; a < d; ++a) {
          if (child & (1 << a)) {
            clo[a] = center[a];
            chi[a] = cell.hi[a];
          }
        }
        sum += integrate_cell(BoxDomain(clo, chi), fn, depth - 1);
      }
      return sum;
    }
  }
  return fc * cell.volume();
}

std::vector<int> default_quadrature_cells(const Domain& domain) {
  if (std::holds_alternative<SphereDomain>(domain)) return {64, 128};
  switch (std::get<BoxDomain>(domain).dim()) {
    case 1: return {4096};
    case 2: return {256, 256};
    default: return {32, 32, 32};
  }
}

int default_depth(const Domain& domain) {
  if (std::holds_alternative<SphereDomain>(domain)) return 5;
  return std::get<BoxDomain>(domain).dim() == 3 ? 3 : 6;
}

double integrate_over_cells(const Domain& domain, const ScalarFn& fn, const std::vector<int>& cells,
                            int depth) {
  if (std::holds_alternative<SphereDomain>(domain)) {
    // dA = dz dphi with z = cos(theta).
    const Grid g = Grid::sphere(1, 1);
    auto pulled = [&](const Point& p) { return fn(g.from_parameter(p)); };
    return integrate_adaptive(g.parameter_box(), pulled, cells, depth);
  }
  return integrate_adaptive(std::get<BoxDomain>(domain), fn, cells, depth);
}

}  // namespace

double integrate_adaptive(const BoxDomain& box, const ScalarFn& fn, const std::vector<int>& coarse_cells,
                          int max_depth) {
  const Grid grid = Grid::box(box, coarse_cells);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) sum += integrate_cell(grid.cell_box(i), fn, max_depth);
  return sum;
}

double integrate_over(const Domain& domain, const ScalarFn& fn) {
  return integrate_over_cells(domain, fn, default_quadrature_cells(domain), default_depth(domain));
}

TargetDensity::TargetDensity(std::string name, Domain domain, ScalarFn shape,
                             std::optional<double> analytic_mass, std::string support,
                             std::optional<double> infimum,
                             std::optional<std::vector<int>> quadrature_cells)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      shape_(std::move(shape)),
      support_(std::move(support)) {
  const auto cells = quadrature_cells.value_or(default_quadrature_cells(domain_));
  const double raw_mass = integrate_over_cells(domain_, shape_, cells, default_depth(domain_));
  const double mass = analytic_mass.value_or(raw_mass);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ConfigError("target '" + name_ + "' has zero or non-finite mass");
  }
  scale_ = 1.0 / mass;
  quadrature_mass_ = raw_mass * scale_;
  if (std::abs(quadrature_mass_ - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << "target '" << name_ << "' integrates to " << quadrature_mass_ << " by quadrature, expected 1";
    throw ConfigError(msg.str());
  }
  if (infimum) infimum_ = *infimum * scale_;
}

TargetDensity make_uniform_target(const Domain& domain) {
  const double m = measure(domain);
  return TargetDensity("uniform", domain, [](const Point&) { return 1.0; }, m, "whole domain", 1.0);
}

TargetDensity make_balls_target(const BoxDomain& box, std::vector<Point> centers, double radius,
                                double floor, BumpProfile profile) {
  const int d = box.dim();
  if (!(radius > 0.0)) throw UsageError("ball radius must be positive");
  if (floor < 0.0) throw UsageError("floor must be non-negative");
  if (centers.empty()) throw UsageError("balls target needs at least one centre");
  for (const auto& c : centers) {
    if (c.size() != d) throw UsageError("ball centre dimension does not match the domain");
    for (int a = 0; a < d; ++a) {
      if (c[a] - radius < box.lo[a] || c[a] + radius > box.hi[a]) {
        throw UsageError("balls must lie inside the domain");
      }
    }
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if ((centers[i] - centers[j]).norm() < 2.0 * radius) throw UsageError("balls must be disjoint");
    }
  }

  // Volume of the unit ball, and the integral of the raised-cosine profile over it.
  double unit_ball = 0.0;
  double cosine_fraction = 0.0;
  const double pi = std::numbers::pi;
  switch (d) {
    case 1:
      unit_ball = 2.0;
      cosine_fraction = 0.5;
      break;
    case 2:
      unit_ball = pi;
      cosine_fraction = 0.5 - 2.0 / (pi * pi);
      break;
    default:
      unit_ball = 4.0 / 3.0 * pi;
      cosine_fraction = 0.5 - 3.0 / (pi * pi);
      break;
  }
  const double ball_volume = unit_ball * std::pow(radius, d);
  const double per_ball = profile == BumpProfile::Flat ? ball_volume : cosine_fraction * ball_volume;
  const double mass = static_cast<double>(centers.size()) * per_ball + floor * box.volume();

  const double r2 = radius * radius;
  auto shape = [centers, radius, r2, floor, profile](const Point& x) {
    double v = floor;
    for (const auto& c : centers) {
      const double dist2 = (x - c).squaredNorm();
      if (dist2 < r2) {
        v += profile == BumpProfile::Flat
                 ? 1.0
                 : 0.5 * (1.0 + std::cos(std::numbers::pi * std::sqrt(dist2) / radius));
        break;
      }
    }
    return v;
  };
  std::ostringstream support;
  support << centers.size() << " ball(s) of radius " << radius;
  if (floor > 0.0) support << " plus floor " << floor;
  std::optional<double> inf;
  if (floor > 0.0) inf = floor;
  return TargetDensity(profile == BumpProfile::Flat ? "balls" : "cosine-bumps", box, shape, mass,
                       support.str(), inf);
}

TargetDensity make_balls8_target(const BoxDomain& box, double floor) {
  if (box.dim() != 3) throw UsageError("balls8 target needs a 3-D box");
  std::vector<Point> centers;
  for (double fx : {0.25, 0.75})
    for (double fy : {0.25, 0.75})
      for (double fz : {0.25, 0.75})
        centers.push_back(make_point({box.lo[0] + fx * box.width(0), box.lo[1] + fy * box.width(1),
                                      box.lo[2] + fz * box.width(2)}));
  const double radius = 0.125 * std::min({box.width(0), box.width(1), box.width(2)});
  auto t = make_balls_target(box, std::move(centers), radius, floor);
  return t;
}

TargetDensity make_sphere_caps_target(double threshold) {
  if (!(threshold > 1.0 / 3.0 && threshold < 1.0)) {
    throw UsageError("cap threshold must lie in (1/3, 1)");
  }
  // Caps are disjoint for threshold > 1/2; each has area 2 pi (1 - sqrt(threshold)).
  const double cap_area = 2.0 * std::numbers::pi * (1.0 - std::sqrt(threshold));
  std::optional<double> mass;
  if (threshold > 0.5) mass = 6.0 * cap_area;
  auto shape = [threshold](const Point& x) {
    return (x[0] * x[0] >= threshold || x[1] * x[1] >= threshold || x[2] * x[2] >= threshold) ? 1.0 : 0.0;
  };
  std::ostringstream support;
  support << "six caps x_i^2 >= " << threshold;
  return TargetDensity("sphere-caps", SphereDomain{}, shape, mass, support.str());
}

TargetDensity make_sinusoid_target(const BoxDomain& box, double amplitude, int wavenumber) {
  if (!(std::abs(amplitude) < 1.0)) throw UsageError("sinusoid amplitude must satisfy |A| < 1");
  if (wavenumber < 1) throw UsageError("sinusoid wavenumber must be >= 1");
  const double lo = box.lo[0];
  const double w = box.width(0);
  auto shape = [=](const Point& x) {
    return 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * wavenumber * (x[0] - lo) / w);
  };
  return TargetDensity("sinusoid", box, shape, box.volume(), "whole domain", 1.0 - std::abs(amplitude));
}

TargetDensity make_grid_target(const Grid& grid, std::vector<double> values) {
  if (grid.kind() != Grid::Kind::Box) throw UsageError("grid targets are defined on box grids");
  if (values.size() != grid.size()) {
    std::ostringstream msg;
    msg << "grid target has " << values.size() << " values, grid has " << grid.size() << " cells";
    throw UsageError(msg.str());
  }
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError("grid target values must be finite and >= 0");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mass = sum * grid.cell_volume();
  const double inf = *std::min_element(values.begin(), values.end());
  auto shared = std::make_shared<const std::vector<double>>(std::move(values));
  auto shape = [grid, shared](const Point& x) { return (*shared)[grid.locate_clamped(x)]; };
  std::vector<int> cells;
  for (int a = 0; a < grid.axes(); ++a) cells.push_back(grid.cells(a));
  return TargetDensity("grid", grid.parameter_box(), shape, mass, "grid file", inf, cells);
}

GridField project_target(const TargetDensity& target, const Grid& grid, int subsamples) {
  if (subsamples < 1) throw UsageError("subsamples must be >= 1");
  GridField out(grid);
  const int axes = grid.axes();
  int total = 1;
  for (int a = 0; a < axes; ++a) total *= subsamples;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const BoxDomain cell = grid.cell_box(i);
    double sum = 0.0;
    for (int s = 0; s < total; ++s) {
      Point p(axes);
      int rem = s;
      for (int a = 0; a < axes; ++a) {
        const int k = rem % subsamples;
        rem /= subsamples;
        p[a] = cell.lo[a] + (k + 0.5) / subsamples * cell.width(a);
      }
      sum += target(grid.from_parameter(p));
    }
    out.values[i] = sum / total;
  }
  return out;
}

}  // namespace swarmcov
