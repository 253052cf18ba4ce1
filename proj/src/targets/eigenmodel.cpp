#include <cmath>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/models.hpp"
#include "stiefel/normal.hpp"

namespace stiefel {

EigenmodelModel::EigenmodelModel(EigenmodelData data) : data_(std::move(data)) {
  const Matrix& y = data_.y;
  if (y.rows() != y.cols()) throw PreconditionError("eigenmodel: adjacency matrix must be square");
  if (data_.K < 1 || data_.K > y.rows()) throw PreconditionError("eigenmodel: need 1 <= K <= J");
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) {
      if (y(i, j) != 0.0 && y(i, j) != 1.0) {
        throw PreconditionError("eigenmodel: entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not 0/1");
      }
      if (y(i, j) != y(j, i)) throw PreconditionError("eigenmodel: adjacency matrix is not symmetric");
    }
}

std::vector<StiefelBlock> EigenmodelModel::stiefel_blocks() const { return {{"upsilon", data_.y.rows(), data_.K}}; }

std::vector<AuxBlock> EigenmodelModel::aux_blocks() const {
  return {{"lambda", data_.K, Constraint::Unconstrained}, {"mu", 1, Constraint::Unconstrained}};
}

double EigenmodelModel::log_density(const ModelPoint& x, ModelPoint* grad) const {
  check_shapes(x);
  const Matrix& u = x.stiefel[0];
  const std::vector<double>& lambda = x.aux[0];
  const double mu = x.aux[1][0];
  const std::size_t J = u.rows();
  const std::size_t K = u.cols();

  // g(j, j') = d loglik / d m_jj' on the strict upper triangle
  Matrix g(J, J);
  double total = 0.0;
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t jp = j + 1; jp < J; ++jp) {
      double m = mu;
      for (std::size_t k = 0; k < K; ++k) m += lambda[k] * u(j, k) * u(jp, k);
      if (data_.y(j, jp) == 1.0) {
        total += log_normal_cdf(m);
        g(j, jp) = log_normal_cdf_grad(m);
      } else {
        total += log_normal_cdf(-m);
        g(j, jp) = -log_normal_cdf_grad(-m);
      }
    }

  const double lambda_var = static_cast<double>(J);
  total += log_normal_pdf(mu, 0.0, kMuPriorSd);
  for (double l : lambda) total += log_normal_pdf(l, 0.0, std::sqrt(lambda_var));

  if (grad) {
    *grad = zero_point();
    Matrix& ubar = grad->stiefel[0];
    std::vector<double>& lbar = grad->aux[0];
    double mubar = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t jp = j + 1; jp < J; ++jp) {
        const double gj = g(j, jp);
        if (gj == 0.0) continue;
        mubar += gj;
        for (std::size_t k = 0; k < K; ++k) {
          lbar[k] += gj * u(j, k) * u(jp, k);
          ubar(j, k) += gj * lambda[k] * u(jp, k);
          ubar(jp, k) += gj * lambda[k] * u(j, k);
        }
      }
    for (std::size_t k = 0; k < K; ++k) lbar[k] -= lambda[k] / lambda_var;
    grad->aux[1][0] = mubar - mu / (kMuPriorSd * kMuPriorSd);
  }
  return total;
}

}  // namespace stiefel
