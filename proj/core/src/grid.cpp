#include "swarmcov/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace swarmcov {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Grid Grid::box(const BoxDomain& domain, std::vector<int> cells) {
  if (static_cast<int>(cells.size()) != domain.dim()) {
    throw UsageError("grid needs one cell count per domain axis");
  }
  Grid g;
  g.kind_ = Kind::Box;
  g.size_ = 1;
  for (int c : cells) {
    if (c < 1) throw UsageError("grid cell counts must be >= 1");
    g.size_ *= static_cast<std::size_t>(c);
  }
  g.cells_ = std::move(cells);
  g.param_ = domain;
  g.cell_volume_ = domain.volume() / static_cast<double>(g.size_);
  return g;
}

Grid Grid::sphere(int nz, int nphi) {
  if (nz < 1 || nphi < 1) throw UsageError("sphere grid cell counts must be >= 1");
  Grid g;
  g.kind_ = Kind::Sphere;
  g.cells_ = {nz, nphi};
  g.size_ = static_cast<std::size_t>(nz) * static_cast<std::size_t>(nphi);
  g.param_ = BoxDomain(make_point({-1.0, 0.0}), make_point({1.0, kTwoPi}));
  g.cell_volume_ = SphereDomain::area() / static_cast<double>(g.size_);
  return g;
}

Grid Grid::over(const Domain& domain, int cells_per_axis) {
  if (const auto* box = std::get_if<BoxDomain>(&domain)) {
    return Grid::box(*box, std::vector<int>(static_cast<std::size_t>(box->dim()), cells_per_axis));
  }
  return Grid::sphere(cells_per_axis, 2 * cells_per_axis);
}

double Grid::spacing(int axis) const {
  return param_.width(axis) / static_cast<double>(cells_[static_cast<std::size_t>(axis)]);
}

Point Grid::to_parameter(const Point& x) const {
  if (kind_ == Kind::Box) return x;
  if (x.size() != 3) throw UsageError("sphere grid query needs a 3-D point");
  double phi = std::atan2(x[1], x[0]);
  if (phi < 0.0) phi += kTwoPi;
  return make_point({std::clamp(x[2], -1.0, 1.0), phi});
}

Point Grid::from_parameter(const Point& p) const {
  if (kind_ == Kind::Box) return p;
  const double z = p[0];
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return make_point({r * std::cos(p[1]), r * std::sin(p[1]), z});
}

std::optional<std::size_t> Grid::locate(const Point& x) const {
  bool clamped = false;
  const std::size_t idx = locate_clamped(x, &clamped);
  if (clamped) return std::nullopt;
  return idx;
}

std::size_t Grid::locate_clamped(const Point& x, bool* was_clamped) const {
  const Point p = to_parameter(x);
  if (p.size() != static_cast<Eigen::Index>(cells_.size())) throw UsageError("grid query has the wrong dimension");
  bool clamped = false;
  std::size_t index = 0;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    const int n = cells_[a];
    const auto ai = static_cast<int>(a);
    const double u = (p[ai] - param_.lo[ai]) / param_.width(ai);
    long k = static_cast<long>(std::floor(u * n));
    if (!(u >= 0.0 && u <= 1.0)) clamped = true;
    k = std::clamp<long>(k, 0, n - 1);
    index += static_cast<std::size_t>(k) * stride;
    stride *= static_cast<std::size_t>(n);
  }
  if (was_clamped) *was_clamped = clamped;
  return index;
}

std::array<int, 3> Grid::unravel(std::size_t index) const {
  std::array<int, 3> out{0, 0, 0};
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    const auto n = static_cast<std::size_t>(cells_[a]);
    out[a] = static_cast<int>(index % n);
    index /= n;
  }
  return out;
}

BoxDomain Grid::cell_box(std::size_t index) const {
  const auto ijk = unravel(index);
  Point lo(axes()), hi(axes());
  for (int a = 0; a < axes(); ++a) {
    const double h = spacing(a);
    lo[a] = param_.lo[a] + h * ijk[static_cast<std::size_t>(a)];
    hi[a] = lo[a] + h;
  }
  return BoxDomain(lo, hi);
}

Point Grid::cell_center(std::size_t index) const {
  const BoxDomain b = cell_box(index);
  return from_parameter(0.5 * (b.lo + b.hi));
}

bool Grid::operator==(const Grid& other) const {
  return kind_ == other.kind_ && cells_ == other.cells_ && param_.lo == other.param_.lo &&
         param_.hi == other.param_.hi;
}

GridField::GridField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) throw UsageError("grid field value count does not match the grid");
}

double GridField::mass() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

double GridField::min() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

bool GridField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace swarmcov
