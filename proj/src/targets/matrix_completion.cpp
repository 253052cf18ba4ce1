#include <cmath>
#include <numbers>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/models.hpp"

namespace stiefel {

MatrixCompletionModel::MatrixCompletionModel(McData data) : data_(std::move(data)) {
  const std::size_t J = data_.y.rows();
  const std::size_t T = data_.y.cols();
  if (data_.missing.size() != J * T) throw PreconditionError("matrix_completion: mask must have J*T entries");
  if (data_.K < 1 || data_.K >= std::min(J, T)) throw PreconditionError("matrix_completion: need 1 <= K < min(J, T)");
  if (!(data_.eta > 0.0)) throw PreconditionError("matrix_completion: eta must be positive");
  for (const Matrix& c : data_.covariates)
    if (c.rows() != J || c.cols() != T) throw PreconditionError("matrix_completion: covariates must be J x T");
  std::vector<std::size_t> row_obs(J, 0), col_obs(T, 0);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t t = 0; t < T; ++t) {
      if (data_.missing[j * T + t]) {
        cells_.emplace_back(j, t);
      } else {
        if (!std::isfinite(data_.y(j, t)))
          throw PreconditionError("matrix_completion: observed entry (" + std::to_string(j) + "," +
                                  std::to_string(t) + ") is not finite");
        ++row_obs[j];
        ++col_obs[t];
      }
    }
  for (std::size_t j = 0; j < J; ++j)
    if (row_obs[j] == 0) throw PreconditionError("matrix_completion: row " + std::to_string(j) + " has no observations");
  for (std::size_t t = 0; t < T; ++t)
    if (col_obs[t] == 0) throw PreconditionError("matrix_completion: column " + std::to_string(t) + " has no observations");
}

std::vector<StiefelBlock> MatrixCompletionModel::stiefel_blocks() const {
  return {{"phi", data_.y.rows(), data_.K}, {"psi", data_.y.cols(), data_.K}};
}

std::optional<std::size_t> MatrixCompletionModel::beta_index() const noexcept {
  if (data_.covariates.empty()) return std::nullopt;
  return 1;
}

std::size_t MatrixCompletionModel::sigma2_index() const noexcept { return data_.covariates.empty() ? 1 : 2; }

std::optional<std::size_t> MatrixCompletionModel::y_miss_index() const noexcept {
  if (cells_.empty()) return std::nullopt;
  return sigma2_index() + 1;
}

std::vector<AuxBlock> MatrixCompletionModel::aux_blocks() const {
  std::vector<AuxBlock> out{{"lambda", data_.K, Constraint::Positive}};
  if (!data_.covariates.empty()) out.push_back({"beta", data_.covariates.size(), Constraint::Unconstrained});
  out.push_back({"sigma2", 1, Constraint::Positive});
  if (!cells_.empty()) out.push_back({"y_miss", cells_.size(), Constraint::Unconstrained});
  return out;
}

double MatrixCompletionModel::log_density(const ModelPoint& x, ModelPoint* grad) const {
  check_shapes(x);
  const Matrix& phi = x.stiefel[0];
  const Matrix& psi = x.stiefel[1];
  const std::vector<double>& lambda = x.aux[lambda_index()];
  const double tau = x.aux[sigma2_index()][0];
  const std::size_t J = data_.y.rows();
  const std::size_t T = data_.y.cols();
  const std::size_t K = data_.K;
  for (double l : lambda)
    if (!(l > 0.0)) throw DomainError("matrix_completion: lambda must be positive");
  if (!(tau > 0.0)) throw DomainError("matrix_completion: sigma2 must be positive");

  // E = Y - Phi L Psi^T - Xi
  Matrix pl = phi;
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k) pl(j, k) *= lambda[k];
  Matrix e = data_.y;
  if (auto yi = y_miss_index()) {
    const std::vector<double>& ym = x.aux[*yi];
    for (std::size_t m = 0; m < cells_.size(); ++m) e(cells_[m].first, cells_[m].second) = ym[m];
  }
  e -= matmul_nt(pl, psi);
  if (auto bi = beta_index()) {
    const std::vector<double>& beta = x.aux[*bi];
    for (std::size_t p = 0; p < beta.size(); ++p) e -= data_.covariates[p] * beta[p];
  }

  const double jt = static_cast<double>(J * T);
  const double sse = frobenius_dot(e, e);
  double value = -0.5 * jt * std::log(2.0 * std::numbers::pi * tau) - sse / (2.0 * tau);
  for (double l : lambda) value += std::log(data_.eta) - data_.eta * l;
  value -= std::log(tau);  // Jeffreys
  if (!grad) return value;

  *grad = zero_point();
  const Matrix ep = matmul(e, psi);  // J x K
  Matrix& phibar = grad->stiefel[0];
  Matrix& psibar = grad->stiefel[1];
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k) phibar(j, k) = ep(j, k) * lambda[k] / tau;
  const Matrix etp = matmul_tn(e, phi);  // T x K
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) psibar(t, k) = etp(t, k) * lambda[k] / tau;
  std::vector<double>& lbar = grad->aux[lambda_index()];
  for (std::size_t k = 0; k < K; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < J; ++j) acc += phi(j, k) * ep(j, k);
    lbar[k] = acc / tau - data_.eta;
  }
  if (auto bi = beta_index()) {
    for (std::size_t p = 0; p < data_.covariates.size(); ++p)
      grad->aux[*bi][p] = frobenius_dot(e, data_.covariates[p]) / tau;
  }
  grad->aux[sigma2_index()][0] = -0.5 * jt / tau + sse / (2.0 * tau * tau) - 1.0 / tau;
  if (auto yi = y_miss_index()) {
    for (std::size_t m = 0; m < cells_.size(); ++m) grad->aux[*yi][m] = -e(cells_[m].first, cells_[m].second) / tau;
  }
  return value;
}

}  // namespace stiefel
