#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace swarmcov {

/// Largest ambient dimension any built-in model uses.
inline constexpr int kMaxDim = 3;

/// Point or tangent vector in an ambient space of dimension <= kMaxDim.
/// Fixed-capacity storage keeps hot loops allocation free.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Invalid input or configuration supplied by the caller (exit code 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration that is well formed but incompatible with the chosen model.
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Failure while executing a well-posed model (exit code 1).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public DomainError {
 public:
  using DomainError::DomainError;
};

inline Point make_point(std::initializer_list<double> values) {
  Point p(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) p[i++] = v;
  return p;
}

inline bool all_finite(const Point& p) { return p.allFinite(); }

}  // namespace swarmcov
