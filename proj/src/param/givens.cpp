#include <cmath>
#include <limits>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/normal.hpp"
#include "tapes.hpp"

namespace stiefel {
namespace {

// Rotate rows k and j of the first K columns by theta, counterclockwise.
void rotate_rows(Matrix& x, std::size_t k, std::size_t j, double c, double s) {
  for (std::size_t col = 0; col < x.cols(); ++col) {
    const double xk = x(k, col);
    const double xj = x(j, col);
    x(k, col) = c * xk - s * xj;
    x(j, col) = s * xk + c * xj;
  }
}

Matrix apply_rotations(const std::vector<GivensIndex>& idx, std::span<const double> theta, std::size_t J,
                       std::size_t K) {
  Matrix x = Matrix::eye(J, K);
  for (std::size_t a = idx.size(); a-- > 0;) rotate_rows(x, idx[a].k, idx[a].j, std::cos(theta[a]), std::sin(theta[a]));
  return x;
}

class GivensTape final : public MapTape {
 public:
  GivensTape(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options)
      : J_(spec.J), K_(spec.K), area_(options.givens_area_correction), phi_(phi.begin(), phi.end()) {
    idx_ = givens_indices(J_, K_);
    angles_ = givens_angles(phi, J_, K_);
    result_.upsilon = apply_rotations(idx_, angles_.theta, J_, K_);
    double adj = givens_log_jacobian(angles_.theta, J_, K_);
    for (double r : angles_.r) {
      adj += log_normal_pdf(r, kGivensRadiusMean, kGivensRadiusSd);
      if (area_) adj -= std::log(r);
    }
    result_.log_adjust = adj;
  }

  void pullback(const Matrix& ubar, double w, std::span<double> grad) const override {
    Matrix out = result_.upsilon;
    Matrix ybar = ubar;
    const double var = kGivensRadiusSd * kGivensRadiusSd;
    for (std::size_t a = 0; a < idx_.size(); ++a) {
      const auto [k, j] = idx_[a];
      const double th = angles_.theta[a];
      const double c = std::cos(th);
      const double s = std::sin(th);
      double theta_bar = 0.0;
      for (std::size_t col = 0; col < K_; ++col) {
        theta_bar += ybar(j, col) * out(k, col) - ybar(k, col) * out(j, col);
        const double yk = ybar(k, col);
        const double yj = ybar(j, col);
        ybar(k, col) = c * yk + s * yj;
        ybar(j, col) = -s * yk + c * yj;
        const double ok = out(k, col);
        const double oj = out(j, col);
        out(k, col) = c * ok + s * oj;
        out(j, col) = -s * ok + c * oj;
      }
      const int p = givens_cos_exponent(k, j);
      if (p != 0) theta_bar -= w * p * std::tan(th);

      const double r = angles_.r[a];
      double r_bar = -w * (r - kGivensRadiusMean) / var;
      if (area_) r_bar -= w / r;

      const double flat = phi_[2 * a];
      const double sharp = phi_[2 * a + 1];
      const double r2 = r * r;
      grad[2 * a] += theta_bar * (-sharp / r2) + r_bar * flat / r;
      grad[2 * a + 1] += theta_bar * (flat / r2) + r_bar * sharp / r;
    }
  }

 private:
  std::size_t J_;
  std::size_t K_;
  bool area_;
  std::vector<double> phi_;
  std::vector<GivensIndex> idx_;
  GivensAngles angles_;
};

}  // namespace

std::vector<GivensIndex> givens_indices(std::size_t J, std::size_t K) {
  std::vector<GivensIndex> out;
  out.reserve(stiefel_dimension(J, K));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = k + 1; j < J; ++j) out.push_back({k, j});
  return out;
}

int givens_cos_exponent(std::size_t k, std::size_t j) { return static_cast<int>(j - k - 1); }

Matrix givens_upsilon_from_angles(std::span<const double> theta, std::size_t J, std::size_t K) {
  const auto idx = givens_indices(J, K);
  if (theta.size() != idx.size()) {
    throw PreconditionError("givens: expected " + std::to_string(idx.size()) + " angles, got " +
                            std::to_string(theta.size()));
  }
  return apply_rotations(idx, theta, J, K);
}

double givens_log_jacobian(std::span<const double> theta, std::size_t J, std::size_t K) {
  const auto idx = givens_indices(J, K);
  if (theta.size() != idx.size()) {
    throw PreconditionError("givens: expected " + std::to_string(idx.size()) + " angles, got " +
                            std::to_string(theta.size()));
  }
  double total = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const int p = givens_cos_exponent(idx[a].k, idx[a].j);
    if (p == 0) continue;
    // |cos|: atan2 angles cover the frame with constant multiplicity
    const double c = std::abs(std::cos(theta[a]));
    if (!(c > 0.0)) return -std::numeric_limits<double>::infinity();
    total += p * std::log(c);
  }
  return total;
}

GivensAngles givens_angles(std::span<const double> phi, std::size_t J, std::size_t K) {
  ParamSpec spec{Kind::Givens, J, K};
  spec.validate();
  detail::require_phi_length(spec, phi);
  const std::size_t n = phi.size() / 2;
  GivensAngles out;
  out.theta.resize(n);
  out.r.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double flat = phi[2 * a];
    const double sharp = phi[2 * a + 1];
    out.r[a] = std::hypot(flat, sharp);
    if (out.r[a] == 0.0) throw DomainError("givens: coordinate pair " + std::to_string(a) + " is at the origin");
    out.theta[a] = std::atan2(sharp, flat);
  }
  return out;
}

namespace detail {

std::unique_ptr<MapTape> record_givens(const ParamSpec& spec, std::span<const double> phi,
                                       const ParamOptions& options) {
  return std::make_unique<GivensTape>(spec, phi, options);
}

}  // namespace detail
}  // namespace stiefel
