#include <cmath>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/tolerances.hpp"
#include "tapes.hpp"

namespace stiefel::detail {
namespace {

struct Reflector {
  std::size_t offset = 0;  // first row it acts on
  std::vector<double> v;   // raw coordinates, length J - offset
  std::vector<double> u;   // unit reflection direction
  double sigma = 1.0;
  double nu = 0.0;      // |v|
  double w_norm = 0.0;  // |v + sigma nu e1|
  Matrix input;         // rows offset..J-1 of the matrix it was applied to
};

// Upsilon = H_0 H_1 ... H_{K-1} I_{JxK}; H_i reflects rows i..J-1 and is
// scaled by -sign(v_1) so that its leading entry maps e1 to v / |v|.
class HouseholderTape final : public MapTape {
 public:
  HouseholderTape(const ParamSpec& spec, std::span<const double> phi) : phi_(phi.begin(), phi.end()) {
    const std::size_t J = spec.J;
    const std::size_t K = spec.K;
    refl_.resize(K);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < K; ++i) {
      Reflector& r = refl_[i];
      const std::size_t n = J - i;
      r.offset = i;
      r.v.assign(phi.begin() + static_cast<std::ptrdiff_t>(pos), phi.begin() + static_cast<std::ptrdiff_t>(pos + n));
      pos += n;
      r.nu = std::sqrt(dot(r.v, r.v));
      if (r.nu < kTolerances.householder_min_norm) {
        throw DomainError("householder: reflector " + std::to_string(i) + " has a zero coordinate vector");
      }
      r.sigma = sgn(r.v[0]);
      r.u = r.v;
      r.u[0] += r.sigma * r.nu;
      r.w_norm = std::sqrt(dot(r.u, r.u));
      for (double& x : r.u) x /= r.w_norm;
    }

    Matrix x = Matrix::eye(J, K);
    for (std::size_t step = K; step-- > 0;) {
      Reflector& r = refl_[step];
      const std::size_t n = J - r.offset;
      r.input = Matrix(n, K);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < K; ++c) r.input(a, c) = x(r.offset + a, c);
      for (std::size_t c = 0; c < K; ++c) {
        double proj = 0.0;
        for (std::size_t a = 0; a < n; ++a) proj += r.u[a] * r.input(a, c);
        for (std::size_t a = 0; a < n; ++a) x(r.offset + a, c) = -r.sigma * (r.input(a, c) - 2.0 * r.u[a] * proj);
      }
    }
    result_.upsilon = std::move(x);
    result_.log_adjust = -0.5 * dot(phi_, phi_);
  }

  void pullback(const Matrix& ubar, double w, std::span<double> grad) const override {
    const std::size_t J = ubar.rows();
    const std::size_t K = ubar.cols();
    Matrix obar = ubar;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < K; ++i) {
      const Reflector& r = refl_[i];
      const std::size_t n = J - r.offset;
      std::vector<double> a(K, 0.0), b(K, 0.0);
      for (std::size_t c = 0; c < K; ++c)
        for (std::size_t row = 0; row < n; ++row) {
          a[c] += r.input(row, c) * r.u[row];
          b[c] += obar(r.offset + row, c) * r.u[row];
        }
      std::vector<double> ubar_dir(n, 0.0);
      for (std::size_t row = 0; row < n; ++row) {
        double acc = 0.0;
        for (std::size_t c = 0; c < K; ++c) acc += obar(r.offset + row, c) * a[c] + r.input(row, c) * b[c];
        ubar_dir[row] = 2.0 * r.sigma * acc;
      }
      for (std::size_t row = 0; row < n; ++row)
        for (std::size_t c = 0; c < K; ++c)
          obar(r.offset + row, c) = -r.sigma * (obar(r.offset + row, c) - 2.0 * r.u[row] * b[c]);

      const double uu = dot(r.u, ubar_dir);
      std::vector<double> wbar(n);
      for (std::size_t row = 0; row < n; ++row) wbar[row] = (ubar_dir[row] - r.u[row] * uu) / r.w_norm;
      const double lead = r.sigma * wbar[0] / r.nu;
      for (std::size_t row = 0; row < n; ++row) grad[pos + row] += wbar[row] + lead * r.v[row] - w * r.v[row];
      pos += n;
    }
  }

 private:
  std::vector<double> phi_;
  std::vector<Reflector> refl_;
};

}  // namespace

std::unique_ptr<MapTape> record_householder(const ParamSpec& spec, std::span<const double> phi) {
  return std::make_unique<HouseholderTape>(spec, phi);
}

}  // namespace stiefel::detail
