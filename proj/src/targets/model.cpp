#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/models.hpp"

namespace stiefel {

ModelPoint TargetModel::zero_point() const {
  ModelPoint p;
  for (const auto& b : stiefel_blocks()) p.stiefel.emplace_back(b.J, b.K);
  for (const auto& b : aux_blocks()) p.aux.emplace_back(b.size, 0.0);
  return p;
}

void TargetModel::check_shapes(const ModelPoint& x) const {
  const auto sb = stiefel_blocks();
  const auto ab = aux_blocks();
  if (x.stiefel.size() != sb.size() || x.aux.size() != ab.size()) {
    throw PreconditionError(name() + ": point has the wrong number of blocks");
  }
  for (std::size_t i = 0; i < sb.size(); ++i) {
    if (x.stiefel[i].rows() != sb[i].J || x.stiefel[i].cols() != sb[i].K) {
      throw PreconditionError(name() + ": block '" + sb[i].name + "' must be " + std::to_string(sb[i].J) + " x " +
                              std::to_string(sb[i].K));
    }
  }
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (x.aux[i].size() != ab[i].size) {
      throw PreconditionError(name() + ": block '" + ab[i].name + "' must have length " + std::to_string(ab[i].size));
    }
  }
}

UniformModel::UniformModel(std::size_t J, std::size_t K) : J_(J), K_(K) {
  if (K < 1 || K > J) throw PreconditionError("uniform: need 1 <= K <= J");
}

std::vector<StiefelBlock> UniformModel::stiefel_blocks() const { return {{"upsilon", J_, K_}}; }

double UniformModel::log_density(const ModelPoint& x, ModelPoint* grad) const {
  check_shapes(x);
  if (grad) *grad = zero_point();
  return 0.0;
}

}  // namespace stiefel
