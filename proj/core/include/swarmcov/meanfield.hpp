#pragma once

#include "swarmcov/domains.hpp"
#include "swarmcov/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace swarmcov {

/// Rates are capped here so the reaction functions stay bounded.
inline constexpr double kDefaultRateCap = 1e6;

enum class KernelKind { EuclideanBump, SphereBump };

/// Compactly supported bump kernel K_eps(x, y) = exp(-1 / (1 - (d(x,y)/eps)^2)) for d < eps.
/// d is the Euclidean distance or the geodesic angle on S^2.
class Kernel {
 public:
  Kernel() = default;
  static Kernel euclidean(double epsilon, int dim);
  static Kernel sphere(double epsilon);

  KernelKind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  int dim() const { return dim_; }
  /// c(eps) with c(eps) * integral of K_eps(., y) = 1.
  double normalization() const { return c_eps_; }

  /// exp(-1/(1-u^2)) for |u| < 1, else 0.
  static double profile(double u);
  double value(const Point& x, const Point& y) const;

 private:
  Kernel(KernelKind kind, double epsilon, int dim);

  KernelKind kind_ = KernelKind::EuclideanBump;
  double epsilon_ = 0.0;
  int dim_ = 0;
  double c_eps_ = 0.0;
};

double kernel_value(const Kernel& kernel, const Point& x, const Point& y);

/// Reciprocal of the kernel integral, by adaptive Gauss-Kronrod quadrature on the radial profile.
double normalization_constant(KernelKind kind, double epsilon, int dim);

/// Uniform spatial hash over the domain's bounding box with cells no narrower than eps.
/// Built once from an immutable snapshot; queries are read-only and thread safe.
class KdeIndex {
 public:
  KdeIndex(const Kernel& kernel, const Domain& domain, std::span<const Point> positions,
           std::size_t n_total);

  /// c(eps) / n_total * sum_j K_eps(x, x_j).
  double density(const Point& x) const;
  /// Same sum, but stops once the running density reaches `threshold`. The result is
  /// exact when below the threshold, and some value >= threshold otherwise.
  double density_until(const Point& x, double threshold) const;

  std::size_t size() const { return count_; }
  std::size_t n_total() const { return n_total_; }

  // The hash grid depends only on the kernel and the domain, so cell ids are
  // comparable between indices built for different snapshots.
  std::size_t cell_count() const { return cell_start_.size() - 1; }
  std::size_t cell_of(const Point& x) const;
  /// True if any cell a query at x would scan is marked.
  bool window_marked(const Point& x, const std::vector<char>& marks) const;
  const Kernel& kernel() const { return kernel_; }

 private:
  double accumulate(const Point& x, double stop_sum) const;

  Kernel kernel_;
  std::size_t n_total_;
  std::size_t count_ = 0;
  int dim_ = 0;
  std::array<int, 3> cells_{1, 1, 1};
  std::array<double, 3> lo_{0, 0, 0};
  std::array<double, 3> inv_width_{0, 0, 0};
  std::vector<std::size_t> cell_start_;
  std::vector<double> coords_;  // positions in cell order, stride dim_
  double scale_ = 0.0;          // c(eps) / n_total
  double cos_eps_ = 1.0;
};

/// c(eps) (1/n_total) sum_j K_eps(x, x_j). Empty positions give 0.
double kde(const Kernel& kernel, const Domain& domain, std::span<const Point> positions,
           std::size_t n_total, const Point& x);

/// r_1(s) = k * max(-s, 0), r_2(s) = k * max(s, 0), both clipped at `cap`.
struct ReactionFunctions {
  double k = 1.0;
  double cap = kDefaultRateCap;

  double r1(double s) const;
  double r2(double s) const;
};

struct TransitionRates {
  double stop = 0.0;    // q1: Moving -> Motionless
  double resume = 0.0;  // q2: Motionless -> Moving
};

/// q_i = r_i(rho - target).
TransitionRates transition_rates(const ReactionFunctions& reactions, double rho, double target);

}  // namespace swarmcov
