#include "stiefel/bench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stiefel/errors.hpp"
#include "stiefel/normal.hpp"
#include "stiefel/param.hpp"

namespace stiefel::bench {

Matrix haar_frame(std::size_t J, std::size_t K, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> phi(J * K);
  for (double& v : phi) v = z(rng);
  return polar_eval(phi, {Kind::Polar, J, K}).upsilon;
}

PpcaSynthSpec ppca_synthetic1() { return {150, 5, 2, {9.0, 1.0}, 0.01, false}; }

PpcaSynthSpec ppca_synthetic2() { return {100, 50, 3, {5.0, 3.0, 1.5}, 1.0, false}; }

PpcaDataset synth_ppca(const PpcaSynthSpec& spec, std::uint64_t seed) {
  if (spec.lambda.size() != spec.K) throw PreconditionError("synth_ppca: lambda must have K entries");
  if (spec.K < 1 || spec.K >= spec.J) throw PreconditionError("synth_ppca: need 1 <= K < J");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  PpcaDataset out;
  out.w_true = haar_frame(spec.J, spec.K, rng);
  out.lambda_true = spec.lambda;
  out.sigma2_true = spec.sigma * spec.sigma;
  out.mu_true.assign(spec.J, 0.0);
  if (spec.with_mean)
    for (double& m : out.mu_true) m = z(rng);

  Matrix y(spec.N, spec.J);
  std::vector<double> latent(spec.K);
  for (std::size_t i = 0; i < spec.N; ++i) {
    for (double& l : latent) l = z(rng);
    for (std::size_t j = 0; j < spec.J; ++j) {
      double v = out.mu_true[j];
      for (std::size_t k = 0; k < spec.K; ++k) v += out.w_true(j, k) * spec.lambda[k] * latent[k];
      y(i, j) = v + spec.sigma * z(rng);
    }
  }
  out.data = PpcaData{std::move(y), spec.K, spec.with_mean, true};
  return out;
}

EigenDataset synth_eigenmodel(const EigenSynthSpec& spec, std::uint64_t seed) {
  if (spec.K < 1 || spec.K > spec.J) throw PreconditionError("synth_eigenmodel: need 1 <= K <= J");
  std::mt19937_64 rng(seed);
  EigenDataset out;
  out.lambda_true = spec.lambda;
  if (out.lambda_true.empty()) {
    const double jd = static_cast<double>(spec.J);
    const double pattern[] = {0.5, 0.3, -0.3};
    for (std::size_t k = 0; k < spec.K; ++k) out.lambda_true.push_back(pattern[k % 3] * jd / (1.0 + k / 3));
  }
  if (out.lambda_true.size() != spec.K) throw PreconditionError("synth_eigenmodel: lambda must have K entries");
  out.mu_true = spec.mu;
  out.upsilon_true = haar_frame(spec.J, spec.K, rng);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix y(spec.J, spec.J);
  for (std::size_t j = 0; j < spec.J; ++j)
    for (std::size_t jp = j + 1; jp < spec.J; ++jp) {
      double m = spec.mu;
      for (std::size_t k = 0; k < spec.K; ++k)
        m += out.lambda_true[k] * out.upsilon_true(j, k) * out.upsilon_true(jp, k);
      const double p = std::exp(log_normal_cdf(m));
      const double edge = unif(rng) < p ? 1.0 : 0.0;
      y(j, jp) = edge;
      y(jp, j) = edge;
    }
  out.data = EigenmodelData{std::move(y), spec.K};
  return out;
}

McDataset synth_matrix_completion(const McSynthSpec& spec, std::uint64_t seed) {
  const std::size_t J = spec.J;
  const std::size_t T = spec.T;
  if (spec.lambda.size() != spec.K) throw PreconditionError("synth_matrix_completion: lambda must have K entries");
  if (spec.K < 1 || spec.K >= std::min(J, T)) throw PreconditionError("synth_matrix_completion: need 1 <= K < min(J, T)");
  if (spec.missing_fraction < 0.0 || spec.missing_fraction >= 1.0)
    throw PreconditionError("synth_matrix_completion: missing_fraction must be in [0, 1)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  McDataset out;
  out.phi_true = haar_frame(J, spec.K, rng);
  out.psi_true = haar_frame(T, spec.K, rng);
  out.lambda_true = spec.lambda;
  out.sigma_true = spec.sigma;

  McData data;
  data.K = spec.K;
  data.eta = spec.eta;
  for (std::size_t p = 0; p < spec.covariates; ++p) {
    Matrix x(J, T);
    for (double& v : x.data()) v = z(rng);
    data.covariates.push_back(std::move(x));
  }
  Matrix y(J, T);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t t = 0; t < T; ++t) {
      double v = 0.0;
      for (std::size_t k = 0; k < spec.K; ++k) v += out.phi_true(j, k) * spec.lambda[k] * out.psi_true(t, k);
      for (const Matrix& x : data.covariates) v += spec.beta * x(j, t);
      y(j, t) = v + spec.sigma * z(rng);
    }
  out.y_full = y;

  // Mask a fixed number of cells, redrawing until every row and column keeps an observation.
  const std::size_t n_missing = static_cast<std::size_t>(std::round(spec.missing_fraction * J * T));
  std::vector<std::size_t> cells(J * T);
  std::iota(cells.begin(), cells.end(), 0);
  for (int attempt = 0;; ++attempt) {
    if (attempt == 1000) throw PreconditionError("synth_matrix_completion: could not draw a valid mask");
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<bool> missing(J * T, false);
    for (std::size_t m = 0; m < n_missing; ++m) missing[cells[m]] = true;
    bool ok = true;
    for (std::size_t j = 0; j < J && ok; ++j) {
      std::size_t seen = 0;
      for (std::size_t t = 0; t < T; ++t) seen += missing[j * T + t] ? 0 : 1;
      ok = seen > 0;
    }
    for (std::size_t t = 0; t < T && ok; ++t) {
      std::size_t seen = 0;
      for (std::size_t j = 0; j < J; ++j) seen += missing[j * T + t] ? 0 : 1;
      ok = seen > 0;
    }
    if (ok) {
      data.missing = std::move(missing);
      break;
    }
  }
  for (std::size_t c = 0; c < J * T; ++c)
    if (data.missing[c]) y.data()[c] = 0.0;
  data.y = std::move(y);
  out.data = std::move(data);
  return out;
}

}  // namespace stiefel::bench
