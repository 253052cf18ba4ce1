#include <cmath>
#include <numbers>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/linalg.hpp"
#include "stiefel/models.hpp"

namespace stiefel {

PpcaModel::PpcaModel(PpcaData data) : data_(std::move(data)) {
  const std::size_t J = data_.y.cols();
  if (J == 0) throw PreconditionError("ppca: data must have at least one column");
  if (data_.K < 1 || data_.K >= J) throw PreconditionError("ppca: need 1 <= K < J");
  if (!data_.y.all_finite()) throw PreconditionError("ppca: data contain non-finite values");
}

std::vector<StiefelBlock> PpcaModel::stiefel_blocks() const { return {{"W", data_.y.cols(), data_.K}}; }

std::vector<AuxBlock> PpcaModel::aux_blocks() const {
  std::vector<AuxBlock> out{
      {"lambda", data_.K, data_.ordered_lambda ? Constraint::PositiveOrdered : Constraint::Positive},
      {"sigma2", 1, Constraint::Positive}};
  if (data_.with_mean) out.push_back({"mu", data_.y.cols(), Constraint::Unconstrained});
  return out;
}

// Marginal likelihood through the Woodbury and determinant lemmas, with
// U = W diag(lambda), C = U U^T + tau I, Q = I + U^T U / tau.
double PpcaModel::log_density(const ModelPoint& x, ModelPoint* grad) const {
  check_shapes(x);
  const Matrix& w = x.stiefel[0];
  const std::vector<double>& lambda = x.aux[kLambda];
  const double tau = x.aux[kSigma2][0];
  const std::size_t N = data_.y.rows();
  const std::size_t J = data_.y.cols();
  const std::size_t K = data_.K;
  for (double l : lambda)
    if (!(l > 0.0)) throw DomainError("ppca: lambda must be positive");
  if (!(tau > 0.0)) throw DomainError("ppca: sigma2 must be positive");
  if (N == 0) {
    if (grad) *grad = zero_point();
    return 0.0;
  }

  Matrix r = data_.y;
  if (data_.with_mean) {
    const std::vector<double>& mu = x.aux[kMu];
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < J; ++j) r(i, j) -= mu[j];
  }
  Matrix u = w;
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k) u(j, k) *= lambda[k];

  const Matrix utu = matmul_tn(u, u);
  Matrix q = Matrix::identity(K) + utu * (1.0 / tau);
  const Matrix lq = cholesky(q);
  const Matrix q_inv = inverse_from_cholesky(lq);
  const Matrix z = matmul(r, u);  // N x K
  const Matrix a = matmul_tn(z, z);
  const double rr = frobenius_dot(r, r);
  const double tr_qa = frobenius_dot(q_inv, a);  // both symmetric
  const double nd = static_cast<double>(N);
  const double jd = static_cast<double>(J);

  const double value = -0.5 * (nd * jd * std::log(2.0 * std::numbers::pi) + nd * jd * std::log(tau) +
                               nd * logdet_from_cholesky(lq) + rr / tau - tr_qa / (tau * tau));
  if (!grad) return value;

  *grad = zero_point();
  const Matrix b = matmul(matmul(q_inv, a), q_inv);
  Matrix ubar = matmul(u, q_inv) * (-nd / tau);
  ubar -= matmul(u, b) * (1.0 / (tau * tau * tau));
  ubar += matmul(matmul_tn(r, z), q_inv) * (1.0 / (tau * tau));

  Matrix& wbar = grad->stiefel[0];
  std::vector<double>& lbar = grad->aux[kLambda];
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < K; ++k) {
      wbar(j, k) = ubar(j, k) * lambda[k];
      lbar[k] += ubar(j, k) * w(j, k);
    }

  const double tr_q_utu = frobenius_dot(q_inv, utu);
  const double tr_b_utu = frobenius_dot(b, utu);
  grad->aux[kSigma2][0] = -0.5 * (nd * jd / tau - nd * tr_q_utu / (tau * tau) - rr / (tau * tau) -
                                  tr_b_utu / (tau * tau * tau * tau) + 2.0 * tr_qa / (tau * tau * tau));

  if (data_.with_mean) {
    // sum_i C^{-1} r_i with C^{-1} v = v / tau - U Q^{-1} U^T v / tau^2
    std::vector<double> s(J, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < J; ++j) s[j] += r(i, j);
    std::vector<double> uts(K, 0.0);
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < K; ++k) uts[k] += u(j, k) * s[j];
    std::vector<double> t(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < K; ++l) t[k] += q_inv(k, l) * uts[l];
    std::vector<double>& mubar = grad->aux[kMu];
    for (std::size_t j = 0; j < J; ++j) {
      double ut = 0.0;
      for (std::size_t k = 0; k < K; ++k) ut += u(j, k) * t[k];
      mubar[j] = s[j] / tau - ut / (tau * tau);
    }
  }
  return value;
}

}  // namespace stiefel
