#include "swarmcov/meanfield.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace swarmcov {

Kernel::Kernel(KernelKind kind, double epsilon, int dim)
    : kind_(kind), epsilon_(epsilon), dim_(dim), c_eps_(normalization_constant(kind, epsilon, dim)) {}

Kernel Kernel::euclidean(double epsilon, int dim) { return Kernel(KernelKind::EuclideanBump, epsilon, dim); }

Kernel Kernel::sphere(double epsilon) { return Kernel(KernelKind::SphereBump, epsilon, 3); }

double Kernel::profile(double u) {
  const double u2 = u * u;
  if (!(u2 < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - u2));
}

double Kernel::value(const Point& x, const Point& y) const {
  if (kind_ == KernelKind::EuclideanBump) return profile((x - y).norm() / epsilon_);
  return profile(std::acos(std::clamp(x.dot(y), -1.0, 1.0)) / epsilon_);
}

double kernel_value(const Kernel& kernel, const Point& x, const Point& y) { return kernel.value(x, y); }

double normalization_constant(KernelKind kind, double epsilon, int dim) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw UsageError("kernel epsilon must be positive");
  using boost::math::quadrature::gauss_kronrod;
  const double pi = std::numbers::pi;
  auto bump = [epsilon](double r) { return Kernel::profile(r / epsilon); };
  double integral = 0.0;
  if (kind == KernelKind::SphereBump) {
    if (!(epsilon < pi)) throw UsageError("sphere kernel epsilon must be below pi");
    integral = 2.0 * pi *
               gauss_kronrod<double, 61>::integrate([&](double t) { return bump(t) * std::sin(t); }, 0.0,
                                                    epsilon, 15, 1e-13);
  } else {
    switch (dim) {
      case 1:
        integral = 2.0 * gauss_kronrod<double, 61>::integrate(bump, 0.0, epsilon, 15, 1e-13);
        break;
      case 2:
        integral = 2.0 * pi *
                   gauss_kronrod<double, 61>::integrate([&](double r) { return bump(r) * r; }, 0.0, epsilon,
                                                        15, 1e-13);
        break;
      case 3:
        integral = 4.0 * pi *
                   gauss_kronrod<double, 61>::integrate([&](double r) { return bump(r) * r * r; }, 0.0,
                                                        epsilon, 15, 1e-13);
        break;
      default:
        throw UsageError("Euclidean kernel dimension must be in 1..3");
    }
  }
  return 1.0 / integral;
}

KdeIndex::KdeIndex(const Kernel& kernel, const Domain& domain, std::span<const Point> positions,
                   std::size_t n_total)
    : kernel_(kernel), n_total_(n_total), count_(positions.size()) {
  if (n_total_ == 0) throw UsageError("KDE needs a positive swarm size");
  const BoxDomain bounds = bounding_box(domain);
  dim_ = bounds.dim();
  if (kernel_.kind() == KernelKind::EuclideanBump && kernel_.dim() != dim_) {
    throw UsageError("kernel dimension does not match the domain");
  }
  scale_ = kernel_.normalization() / static_cast<double>(n_total_);
  cos_eps_ = std::cos(kernel_.epsilon());

  constexpr std::size_t kMaxCells = std::size_t{1} << 22;
  std::size_t total = 1;
  for (int a = 0; a < dim_; ++a) {
    const double w = bounds.width(a);
    const double n = std::floor(w / kernel_.epsilon());
    cells_[a] = static_cast<int>(std::clamp(n, 1.0, 1e6));
    total *= static_cast<std::size_t>(cells_[a]);
  }
  while (total > kMaxCells) {
    auto it = std::max_element(cells_.begin(), cells_.begin() + dim_);
    total /= static_cast<std::size_t>(*it);
    *it = std::max(1, *it / 2);
    total *= static_cast<std::size_t>(*it);
  }
  for (int a = 0; a < dim_; ++a) {
    lo_[a] = bounds.lo[a];
    inv_width_[a] = cells_[a] / bounds.width(a);
  }

  // Stable counting sort by cell keeps the summation order deterministic.
  cell_start_.assign(total + 1, 0);
  std::vector<std::size_t> cell_of_point(count_);
  for (std::size_t j = 0; j < count_; ++j) {
    cell_of_point[j] = cell_of(positions[j]);
    ++cell_start_[cell_of_point[j] + 1];
  }
  for (std::size_t c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];
  std::vector<std::size_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  coords_.resize(count_ * static_cast<std::size_t>(dim_));
  for (std::size_t j = 0; j < count_; ++j) {
    const std::size_t slot = cursor[cell_of_point[j]]++;
    for (int a = 0; a < dim_; ++a) coords_[slot * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(a)] = positions[j][a];
  }
}

std::size_t KdeIndex::cell_of(const Point& p) const {
  std::size_t idx = 0, stride = 1;
  for (int a = 0; a < dim_; ++a) {
    const long k = std::clamp<long>(static_cast<long>(std::floor((p[a] - lo_[a]) * inv_width_[a])), 0,
                                    cells_[a] - 1);
    idx += static_cast<std::size_t>(k) * stride;
    stride *= static_cast<std::size_t>(cells_[a]);
  }
  return idx;
}

bool KdeIndex::window_marked(const Point& x, const std::vector<char>& marks) const {
  std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const long k = std::clamp<long>(static_cast<long>(std::floor((x[a] - lo_[a]) * inv_width_[a])), 0,
                                    cells_[a] - 1);
    lo[a] = std::max<long>(0, k - 1);
    hi[a] = std::min<long>(cells_[a] - 1, k + 1);
  }
  const long s1 = cells_[0];
  const long s2 = s1 * (dim_ > 1 ? cells_[1] : 1);
  for (long k2 = lo[2]; k2 <= hi[2]; ++k2) {
    for (long k1 = lo[1]; k1 <= hi[1]; ++k1) {
      for (long k0 = lo[0]; k0 <= hi[0]; ++k0) {
        if (marks[static_cast<std::size_t>(k2 * s2 + k1 * s1 + k0)]) return true;
      }
    }
  }
  return false;
}

double KdeIndex::accumulate(const Point& x, double stop_sum) const {
  if (count_ == 0) return 0.0;
  std::array<long, 3> k{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    k[a] = std::clamp<long>(static_cast<long>(std::floor((x[a] - lo_[a]) * inv_width_[a])), 0, cells_[a] - 1);
  }
  const double eps = kernel_.epsilon();
  const double eps2 = eps * eps;
  const double inv_eps2 = 1.0 / eps2;
  const bool sphere = kernel_.kind() == KernelKind::SphereBump;
  const auto d = static_cast<std::size_t>(dim_);

  std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    if (a < dim_) {
      lo[a] = std::max<long>(0, k[a] - 1);
      hi[a] = std::min<long>(cells_[a] - 1, k[a] + 1);
    }
  }
  const std::size_t stride1 = static_cast<std::size_t>(cells_[0]);
  const std::size_t stride2 = stride1 * static_cast<std::size_t>(dim_ > 1 ? cells_[1] : 1);

  double sum = 0.0;
  for (long k2 = lo[2]; k2 <= hi[2]; ++k2) {
    for (long k1 = lo[1]; k1 <= hi[1]; ++k1) {
      // Cells along axis 0 are contiguous, so each row is one run of points.
      const std::size_t row = static_cast<std::size_t>(k2) * stride2 + static_cast<std::size_t>(k1) * stride1;
      const std::size_t begin = cell_start_[row + static_cast<std::size_t>(lo[0])];
      const std::size_t end = cell_start_[row + static_cast<std::size_t>(hi[0]) + 1];
      const double* p = coords_.data() + begin * d;
      for (std::size_t j = begin; j < end; ++j, p += d) {
        if (sphere) {
          const double dot = x[0] * p[0] + x[1] * p[1] + x[2] * p[2];
          if (dot > cos_eps_) sum += Kernel::profile(std::acos(std::min(dot, 1.0)) / eps);
        } else {
          double r2 = 0.0;
          for (std::size_t a = 0; a < d; ++a) {
            const double diff = x[static_cast<Eigen::Index>(a)] - p[a];
            r2 += diff * diff;
          }
          if (r2 < eps2) {
            sum += std::exp(-1.0 / (1.0 - r2 * inv_eps2));
            if (sum >= stop_sum) return sum;
          }
        }
      }
      if (sum >= stop_sum) return sum;
    }
  }
  return sum;
}

double KdeIndex::density(const Point& x) const {
  return scale_ * accumulate(x, std::numeric_limits<double>::infinity());
}

double KdeIndex::density_until(const Point& x, double threshold) const {
  if (!(threshold > 0.0)) return scale_ * accumulate(x, 0.0);
  return scale_ * accumulate(x, threshold / scale_);
}

double kde(const Kernel& kernel, const Domain& domain, std::span<const Point> positions, std::size_t n_total,
           const Point& x) {
  if (positions.empty()) return 0.0;
  return KdeIndex(kernel, domain, positions, n_total).density(x);
}

double ReactionFunctions::r1(double s) const { return s < 0.0 ? std::min(-k * s, cap) : 0.0; }

double ReactionFunctions::r2(double s) const { return s > 0.0 ? std::min(k * s, cap) : 0.0; }

TransitionRates transition_rates(const ReactionFunctions& reactions, double rho, double target) {
  const double s = rho - target;
  return {reactions.r1(s), reactions.r2(s)};
}

}  // namespace swarmcov
