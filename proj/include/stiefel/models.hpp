#pragma once

#include <optional>
#include <vector>

#include "stiefel/model.hpp"

namespace stiefel {

/// Haar-uniform frame: log density 0, so only the parameterization's
/// adjustment drives the sampler.
class UniformModel final : public TargetModel {
 public:
  UniformModel(std::size_t J, std::size_t K);
  std::string name() const override { return "uniform"; }
  std::vector<StiefelBlock> stiefel_blocks() const override;
  std::vector<AuxBlock> aux_blocks() const override { return {}; }
  double log_density(const ModelPoint& x, ModelPoint* grad) const override;

 private:
  std::size_t J_;
  std::size_t K_;
};

struct EigenmodelData {
  Matrix y;           // symmetric 0/1 adjacency, J x J
  std::size_t K = 3;  // latent dimension
};

/// Probit network eigenmodel over the strict upper triangle:
/// P(y_jj' = 1) = Phi((U L U^T)_jj' + mu), mu ~ N(0, 10^2), lambda_k ~ N(0, J).
class EigenmodelModel final : public TargetModel {
 public:
  explicit EigenmodelModel(EigenmodelData data);
  std::string name() const override { return "eigenmodel"; }
  std::vector<StiefelBlock> stiefel_blocks() const override;
  std::vector<AuxBlock> aux_blocks() const override;  // lambda (K), mu (1)
  double log_density(const ModelPoint& x, ModelPoint* grad) const override;

  static constexpr double kMuPriorSd = 10.0;

 private:
  EigenmodelData data_;
};

struct PpcaData {
  Matrix y;  // N x J, one observation per row
  std::size_t K = 1;
  bool with_mean = false;
  bool ordered_lambda = true;  // lambda constrained to be decreasing
};

/// Probabilistic PCA with the latent scores integrated out:
/// y_i ~ N(mu, W L^2 W^T + sigma2 I). Flat priors on lambda, sigma2 and mu.
class PpcaModel final : public TargetModel {
 public:
  explicit PpcaModel(PpcaData data);
  std::string name() const override { return "ppca"; }
  std::vector<StiefelBlock> stiefel_blocks() const override;
  std::vector<AuxBlock> aux_blocks() const override;  // lambda, sigma2[, mu]
  double log_density(const ModelPoint& x, ModelPoint* grad) const override;

  static constexpr std::size_t kLambda = 0;
  static constexpr std::size_t kSigma2 = 1;
  static constexpr std::size_t kMu = 2;

  const PpcaData& data() const noexcept { return data_; }

 private:
  PpcaData data_;
};

struct McData {
  Matrix y;                       // J x T; entries under the mask are ignored
  std::vector<bool> missing;      // row-major J x T, true where y is unobserved
  std::vector<Matrix> covariates;  // p matrices, each J x T
  std::size_t K = 1;
  double eta = 0.1;  // rate of the exponential prior on lambda
};

/// Low-rank panel regression Y = Phi L Psi^T + sum_p beta_p X_p + noise, with
/// the unobserved entries of Y sampled as parameters (row-major mask order).
class MatrixCompletionModel final : public TargetModel {
 public:
  explicit MatrixCompletionModel(McData data);
  std::string name() const override { return "matrix_completion"; }
  std::vector<StiefelBlock> stiefel_blocks() const override;  // phi (J x K), psi (T x K)
  std::vector<AuxBlock> aux_blocks() const override;
  double log_density(const ModelPoint& x, ModelPoint* grad) const override;

  std::size_t lambda_index() const noexcept { return 0; }
  std::optional<std::size_t> beta_index() const noexcept;
  std::size_t sigma2_index() const noexcept;
  std::optional<std::size_t> y_miss_index() const noexcept;
  /// (row, col) of each missing entry in sampling order.
  const std::vector<std::pair<std::size_t, std::size_t>>& missing_cells() const noexcept { return cells_; }
  const McData& data() const noexcept { return data_; }

 private:
  McData data_;
  std::vector<std::pair<std::size_t, std::size_t>> cells_;
};

}  // namespace stiefel
