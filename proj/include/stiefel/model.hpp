#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stiefel/matrix.hpp"

namespace stiefel {

struct StiefelBlock {
  std::string name;
  std::size_t J = 0;
  std::size_t K = 0;
};

enum class Constraint {
  Unconstrained,
  Positive,         // sampled as log x
  PositiveOrdered,  // positive and strictly decreasing, sampled as log increments
};

struct AuxBlock {
  std::string name;
  std::size_t size = 0;
  Constraint constraint = Constraint::Unconstrained;
};

/// Values (or gradients) for every block of a model, in declaration order.
struct ModelPoint {
  std::vector<Matrix> stiefel;
  std::vector<std::vector<double>> aux;
};

/// Unnormalized log posterior over orthonormal frames and auxiliary blocks.
/// Implementations are immutable after construction and safe to call from
/// several threads at once.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::string name() const = 0;
  virtual std::vector<StiefelBlock> stiefel_blocks() const = 0;
  virtual std::vector<AuxBlock> aux_blocks() const = 0;

  /// Log density at x. When grad is non-null it is overwritten with the
  /// gradient, shaped like x. Throws PreconditionError on shape mismatch and
  /// DomainError when a constrained value is out of range.
  virtual double log_density(const ModelPoint& x, ModelPoint* grad) const = 0;

  /// Zero-filled point with this model's block shapes.
  ModelPoint zero_point() const;
  /// Throws PreconditionError if x does not have this model's block shapes.
  void check_shapes(const ModelPoint& x) const;
};

}  // namespace stiefel
