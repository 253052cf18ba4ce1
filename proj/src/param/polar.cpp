#include <cmath>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/linalg.hpp"
#include "stiefel/tolerances.hpp"
#include "tapes.hpp"

namespace stiefel::detail {
namespace {

// Upsilon = Y (Y^T Y)^{-1/2} with Y = unvec(phi), computed as U V^T from the thin SVD.
class PolarTape final : public MapTape {
 public:
  PolarTape(const ParamSpec& spec, std::span<const double> phi)
      : phi_(phi.begin(), phi.end()), y_(Matrix::from_col_major(spec.J, spec.K, phi)) {
    Svd d = svd(y_);
    const double smax = d.s.front();
    const double smin = d.s.back();
    if (!(smax > 0.0) || !(smin > kTolerances.polar_rank * smax)) {
      throw SingularityError("polar: Y is rank deficient (s_min=" + std::to_string(smin) +
                             ", s_max=" + std::to_string(smax) + ")");
    }
    s_ = std::move(d.s);
    v_ = std::move(d.v);
    result_.upsilon = matmul_nt(d.u, v_);
    result_.log_adjust = -0.5 * dot(phi_, phi_);
  }

  void pullback(const Matrix& ubar, double w, std::span<double> grad) const override {
    const std::size_t J = y_.rows();
    const std::size_t K = y_.cols();
    // M = (Y^T Y)^{-1/2} = V S^{-1} V^T
    Matrix m(K, K);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < K; ++l) acc += v_(i, l) * v_(j, l) / s_[l];
        m(i, j) = acc;
      }
    // Gradient with respect to M, symmetrized, pushed through the inverse square root.
    Matrix g = matmul_tn(y_, ubar);
    Matrix gs(K, K);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) gs(i, j) = 0.5 * (g(i, j) + g(j, i));
    Matrix h = matmul(matmul_tn(v_, gs), v_);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) h(i, j) *= -1.0 / (s_[i] * s_[j] * (s_[i] + s_[j]));
    Matrix pbar = matmul_nt(matmul(v_, h), v_);

    Matrix ybar = matmul(ubar, m);
    ybar += 2.0 * matmul(y_, pbar);
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t i = 0; i < J; ++i) {
        const std::size_t idx = j * J + i;
        grad[idx] += ybar(i, j) - w * phi_[idx];
      }
  }

 private:
  std::vector<double> phi_;
  Matrix y_;
  std::vector<double> s_;
  Matrix v_;
};

}  // namespace

std::unique_ptr<MapTape> record_polar(const ParamSpec& spec, std::span<const double> phi) {
  return std::make_unique<PolarTape>(spec, phi);
}

}  // namespace stiefel::detail
