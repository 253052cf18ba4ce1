#include <cmath>
#include <numbers>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/linalg.hpp"
#include "tapes.hpp"

namespace stiefel {
namespace {

std::size_t lower_count(std::size_t K) { return K * (K - 1) / 2; }

struct SkewPair {
  std::size_t p;
  std::size_t q;
};

// Coordinate a of phi moves X along E_a = e_p e_q^T - e_q e_p^T.
std::vector<SkewPair> skew_pairs(std::size_t J, std::size_t K) {
  std::vector<SkewPair> out;
  out.reserve(lower_count(K) + K * (J - K));
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t i = j + 1; i < K; ++i) out.push_back({i, j});
  for (std::size_t r = 0; r < J - K; ++r)
    for (std::size_t c = 0; c < K; ++c) out.push_back({K + r, c});
  return out;
}

Matrix a_block(std::span<const double> phi, std::size_t J, std::size_t K) {
  Matrix a(J - K, K);
  const std::size_t nb = lower_count(K);
  for (std::size_t r = 0; r < J - K; ++r)
    for (std::size_t c = 0; c < K; ++c) a(r, c) = phi[nb + r * K + c];
  return a;
}

Matrix b_block(std::span<const double> phi, std::size_t K) {
  Matrix b(K, K);
  std::size_t pos = 0;
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t i = j + 1; i < K; ++i) {
      b(i, j) = phi[pos];
      b(j, i) = -phi[pos];
      ++pos;
    }
  return b;
}

// Gram matrix of the Jacobian columns 2 R E_a N.
Matrix cayley_gram(const std::vector<SkewPair>& pairs, const Matrix& g1, const Matrix& g2) {
  const std::size_t d = pairs.size();
  Matrix m(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    const auto [p, q] = pairs[a];
    for (std::size_t b = 0; b < d; ++b) {
      const auto [s, t] = pairs[b];
      m(a, b) = 4.0 * (g2(p, s) * g1(t, q) - g2(p, t) * g1(s, q) - g2(q, s) * g1(t, p) + g2(q, t) * g1(s, p));
    }
  }
  return m;
}

class CayleyTape final : public MapTape {
 public:
  CayleyTape(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options)
      : J_(spec.J), K_(spec.K), gram_(options.cayley_jacobian == CayleyJacobian::Gram) {
    a_ = a_block(phi, J_, K_);
    Matrix s = Matrix::identity(K_) - b_block(phi, K_) + matmul_tn(a_, a_);
    s_inv_ = solve(s, Matrix::identity(K_));
    const Matrix n2 = matmul(a_, s_inv_);

    n_ = Matrix(J_, K_);
    for (std::size_t i = 0; i < K_; ++i)
      for (std::size_t c = 0; c < K_; ++c) n_(i, c) = s_inv_(i, c);
    for (std::size_t r = 0; r < J_ - K_; ++r)
      for (std::size_t c = 0; c < K_; ++c) n_(K_ + r, c) = n2(r, c);

    result_.upsilon = 2.0 * n_ - Matrix::eye(J_, K_);
    if (gram_) {
      record_gram(phi);
    } else {
      result_.log_adjust = cayley_log_jacobian_constant(J_, K_) - static_cast<double>(J_ - 1) * log_abs_det(s);
    }
  }

  void pullback(const Matrix& ubar, double w, std::span<double> grad) const override {
    // Upsilon = 2N - E with N = [S^{-1}; A S^{-1}], S = I - B + A^T A.
    Matrix n1bar(K_, K_);
    Matrix n2bar(J_ - K_, K_);
    for (std::size_t i = 0; i < K_; ++i)
      for (std::size_t c = 0; c < K_; ++c) n1bar(i, c) = 2.0 * ubar(i, c);
    for (std::size_t r = 0; r < J_ - K_; ++r)
      for (std::size_t c = 0; c < K_; ++c) n2bar(r, c) = 2.0 * ubar(K_ + r, c);

    Matrix abar = matmul_nt(n2bar, s_inv_);
    Matrix zbar = n1bar + matmul_tn(a_, n2bar);
    const Matrix s_inv_t = s_inv_.transposed();
    Matrix sbar = -1.0 * matmul(matmul(s_inv_t, zbar), s_inv_t);
    if (!gram_ && w != 0.0) sbar -= (w * static_cast<double>(J_ - 1)) * s_inv_t;

    abar += matmul(a_, sbar + sbar.transposed());
    std::size_t pos = 0;
    for (std::size_t j = 0; j < K_; ++j)
      for (std::size_t i = j + 1; i < K_; ++i) grad[pos++] += -(sbar(i, j) - sbar(j, i));
    for (std::size_t r = 0; r < J_ - K_; ++r)
      for (std::size_t c = 0; c < K_; ++c) grad[pos++] += abar(r, c);

    if (gram_ && w != 0.0) gram_pullback(w, grad);
  }

 private:
  void record_gram(std::span<const double> phi) {
    const Matrix x = cayley_skew(phi, J_, K_);
    r_ = solve(Matrix::identity(J_) - x, Matrix::identity(J_));
    g1_ = matmul_nt(n_, n_);
    g2_ = matmul_tn(r_, r_);
    pairs_ = skew_pairs(J_, K_);
    const Matrix l = cholesky(cayley_gram(pairs_, g1_, g2_));
    result_.log_adjust = 0.5 * logdet_from_cholesky(l);
    c_ = inverse_from_cholesky(l);
  }

  void gram_pullback(double w, std::span<double> grad) const {
    const std::size_t d = pairs_.size();
    Matrix g1bar(J_, J_);
    Matrix g2bar(J_, J_);
    for (std::size_t a = 0; a < d; ++a) {
      const auto [p, q] = pairs_[a];
      for (std::size_t b = 0; b < d; ++b) {
        const auto [s, t] = pairs_[b];
        const double c = 2.0 * w * c_(a, b);
        // E_a G1 E_b^T
        g2bar(p, s) += c * g1_(q, t);
        g2bar(p, t) -= c * g1_(q, s);
        g2bar(q, s) -= c * g1_(p, t);
        g2bar(q, t) += c * g1_(p, s);
        // E_b^T G2 E_a
        g1bar(t, q) += c * g2_(s, p);
        g1bar(t, p) -= c * g2_(s, q);
        g1bar(s, q) -= c * g2_(t, p);
        g1bar(s, p) += c * g2_(t, q);
      }
    }
    const Matrix nbar = matmul(g1bar + g1bar.transposed(), n_);
    Matrix rbar = matmul(r_, g2bar + g2bar.transposed());
    for (std::size_t i = 0; i < J_; ++i)
      for (std::size_t c = 0; c < K_; ++c) rbar(i, c) += nbar(i, c);
    // dR = R dX R
    const Matrix xbar = matmul_nt(matmul_tn(r_, rbar), r_);
    for (std::size_t a = 0; a < d; ++a) {
      const auto [p, q] = pairs_[a];
      grad[a] += xbar(p, q) - xbar(q, p);
    }
  }

  std::size_t J_;
  std::size_t K_;
  bool gram_;
  Matrix a_;
  Matrix s_inv_;
  Matrix n_;
  // Gram route only
  Matrix r_;
  Matrix g1_;
  Matrix g2_;
  Matrix c_;
  std::vector<SkewPair> pairs_;
};

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double xij = x(i, j);
      if (xij == 0.0) continue;
      for (std::size_t k = 0; k < y.rows(); ++k)
        for (std::size_t l = 0; l < y.cols(); ++l) out(i * y.rows() + k, j * y.cols() + l) = xij * y(k, l);
    }
  return out;
}

Matrix permutation_matrix(const std::vector<std::size_t>& perm) {
  Matrix p(perm.size(), perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) p(i, perm[i]) = 1.0;
  return p;
}

}  // namespace

Matrix cayley_skew(std::span<const double> phi, std::size_t J, std::size_t K) {
  ParamSpec spec{Kind::Cayley, J, K};
  spec.validate();
  detail::require_phi_length(spec, phi);
  const Matrix a = a_block(phi, J, K);
  const Matrix b = b_block(phi, K);
  Matrix x(J, J);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) x(i, j) = b(i, j);
  for (std::size_t r = 0; r < J - K; ++r)
    for (std::size_t c = 0; c < K; ++c) {
      x(K + r, c) = a(r, c);
      x(c, K + r) = -a(r, c);
    }
  return x;
}

double cayley_log_jacobian_constant(std::size_t J, std::size_t K) {
  const double kk = static_cast<double>(K);
  return (0.75 * kk * (kk - 1.0) + kk * static_cast<double>(J - K)) * std::numbers::ln2;
}

Matrix skew_duplication_matrix(std::size_t K) {
  Matrix d(K * K, lower_count(K));
  std::size_t col = 0;
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t i = j + 1; i < K; ++i) {
      d(j * K + i, col) = 1.0;
      d(i * K + j, col) = -1.0;
      ++col;
    }
  return d;
}

std::vector<std::size_t> commutation_permutation(std::size_t m, std::size_t n) {
  std::vector<std::size_t> p(m * n);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t r = 0; r < n; ++r) p[c * n + r] = r * m + c;
  return p;
}

double cayley_log_jacobian_kronecker(std::span<const double> phi, std::size_t J, std::size_t K) {
  const Matrix x = cayley_skew(phi, J, K);
  const Matrix eye_j = Matrix::identity(J);
  const Matrix r = solve(eye_j - x, eye_j);
  const Matrix n = solve(eye_j - x, Matrix::eye(J, K));
  const Matrix g1 = matmul_nt(n, n);
  const Matrix g2 = matmul_tn(r, r);

  Matrix theta1(J, K);
  for (std::size_t i = 0; i < K; ++i) theta1(i, i) = 1.0;
  Matrix theta2(J, J - K);
  for (std::size_t i = 0; i < J - K; ++i) theta2(K + i, i) = 1.0;

  // vec(X) = (Theta1 kron Theta1) D_K b + (I - K_{J,J}) (Theta1 kron Theta2) K_{K,J-K} vec(A^T)
  const Matrix gamma_b = matmul(kron(theta1, theta1), skew_duplication_matrix(K));
  const Matrix k_jj = permutation_matrix(commutation_permutation(J, J));
  const Matrix k_a = permutation_matrix(commutation_permutation(K, J - K));
  const Matrix gamma_a = matmul(matmul(Matrix::identity(J * J) - k_jj, kron(theta1, theta2)), k_a);

  Matrix gamma(J * J, gamma_b.cols() + gamma_a.cols());
  for (std::size_t i = 0; i < J * J; ++i) {
    for (std::size_t c = 0; c < gamma_b.cols(); ++c) gamma(i, c) = gamma_b(i, c);
    for (std::size_t c = 0; c < gamma_a.cols(); ++c) gamma(i, gamma_b.cols() + c) = gamma_a(i, c);
  }
  const Matrix m = 4.0 * matmul_tn(gamma, matmul(kron(g1, g2), gamma));
  return 0.5 * logdet_from_cholesky(cholesky(m));
}

Matrix cayley_upsilon_dense(std::span<const double> phi, std::size_t J, std::size_t K) {
  const Matrix x = cayley_skew(phi, J, K);
  const Matrix eye_j = Matrix::identity(J);
  return solve(eye_j - x, matmul(eye_j + x, Matrix::eye(J, K)));
}

namespace detail {

std::unique_ptr<MapTape> record_cayley(const ParamSpec& spec, std::span<const double> phi,
                                       const ParamOptions& options) {
  return std::make_unique<CayleyTape>(spec, phi, options);
}

}  // namespace detail
}  // namespace stiefel
