#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "stiefel/density.hpp"
#include "stiefel/model.hpp"
#include "stiefel/param.hpp"

namespace stiefel {

/// Which quantities enter the minimum-ESS computation.
enum class Foi {
  All,          // every frame entry plus auxiliary blocks on their sampled scale
  StiefelOnly,  // frame entries only
};

Foi parse_foi(std::string_view name);
std::string_view foi_name(Foi foi);

/// A TargetModel composed with one parameterization per frame block. Layout
/// of q: [phi of each frame block | transformed auxiliary blocks].
class UnconstrainedTarget final : public LogDensity {
 public:
  UnconstrainedTarget(std::shared_ptr<const TargetModel> model, std::vector<ParamSpec> specs,
                      ParamOptions options = {});

  std::size_t dim() const override { return dim_; }
  /// Model log density at the mapped point plus every log_adjust and the
  /// auxiliary transform Jacobians. Domain and singularity failures give -inf.
  double log_density(std::span<const double> q, std::span<double> grad) const override;

  /// Frames and auxiliary values on the model's scale.
  ModelPoint constrained(std::span<const double> q) const;
  /// Flattened function-of-interest values (frames column-major).
  std::vector<double> monitored(std::span<const double> q, Foi foi) const;
  std::size_t monitored_dim(Foi foi) const;

  const TargetModel& model() const noexcept { return *model_; }
  const std::vector<ParamSpec>& specs() const noexcept { return specs_; }
  std::size_t stiefel_offset(std::size_t block) const { return stiefel_offsets_.at(block); }
  std::size_t aux_offset(std::size_t block) const { return aux_offsets_.at(block); }

 private:
  std::shared_ptr<const TargetModel> model_;
  std::vector<ParamSpec> specs_;
  ParamOptions options_;
  std::vector<AuxBlock> aux_;
  std::vector<std::size_t> stiefel_offsets_;
  std::vector<std::size_t> aux_offsets_;
  std::size_t dim_ = 0;
};

/// Same parameterization kind for every frame block of the model.
std::unique_ptr<UnconstrainedTarget> build_unconstrained(std::shared_ptr<const TargetModel> model, Kind kind,
                                                         ParamOptions options = {});

/// Map sampled values z to the constrained scale; returns the log Jacobian.
double aux_forward(Constraint c, std::span<const double> z, std::span<double> x);
/// zbar = d/dz [ f(x(z)) + log Jacobian ] given xbar = df/dx.
void aux_backward(Constraint c, std::span<const double> z, std::span<const double> xbar, std::span<double> zbar);
/// Inverse of aux_forward. Throws DomainError for values outside the support.
std::vector<double> aux_inverse(Constraint c, std::span<const double> x);

}  // namespace stiefel
