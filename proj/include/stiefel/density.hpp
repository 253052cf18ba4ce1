#pragma once

#include <cstddef>
#include <span>

namespace stiefel {

/// A differentiable log density on R^dim, as consumed by the sampler.
class LogDensity {
 public:
  virtual ~LogDensity() = default;
  virtual std::size_t dim() const = 0;
  /// Log density at q. When grad is non-empty (size dim) it receives the
  /// gradient. Points outside the support return -inf; grad is then unspecified.
  virtual double log_density(std::span<const double> q, std::span<double> grad) const = 0;
};

}  // namespace stiefel
