#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "stiefel/density.hpp"

namespace stiefel::testing {

/// Independent normals with given scales.
class DiagNormal final : public LogDensity {
 public:
  explicit DiagNormal(std::vector<double> sd) : sd_(std::move(sd)) {}
  static DiagNormal standard(std::size_t dim) { return DiagNormal(std::vector<double>(dim, 1.0)); }
  std::size_t dim() const override { return sd_.size(); }
  double log_density(std::span<const double> q, std::span<double> grad) const override {
    double lp = 0.0;
    for (std::size_t i = 0; i < sd_.size(); ++i) {
      const double z = q[i] / sd_[i];
      lp -= 0.5 * z * z;
      if (!grad.empty()) grad[i] = -z / sd_[i];
    }
    return lp;
  }

 private:
  std::vector<double> sd_;
};

/// Bivariate normal, unit variances, correlation rho.
class CorrelatedNormal2 final : public LogDensity {
 public:
  explicit CorrelatedNormal2(double rho) : rho_(rho) {}
  std::size_t dim() const override { return 2; }
  double log_density(std::span<const double> q, std::span<double> grad) const override {
    const double c = 1.0 / (1.0 - rho_ * rho_);
    const double a = q[0];
    const double b = q[1];
    if (!grad.empty()) {
      grad[0] = -c * (a - rho_ * b);
      grad[1] = -c * (b - rho_ * a);
    }
    return -0.5 * c * (a * a - 2.0 * rho_ * a * b + b * b);
  }

 private:
  double rho_;
};

/// Finite only at the origin; every move leaves the support.
class PointMass final : public LogDensity {
 public:
  explicit PointMass(std::size_t dim) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  double log_density(std::span<const double> q, std::span<double> grad) const override {
    for (double x : q)
      if (x != 0.0) return -std::numeric_limits<double>::infinity();
    for (double& g : grad) g = 0.0;
    return 0.0;
  }

 private:
  std::size_t dim_;
};

}  // namespace stiefel::testing
