#include "stiefel/ess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stiefel/errors.hpp"

namespace stiefel {

namespace {

void require_length(std::span<const double> x, const char* who) {
  if (x.size() < 4) throw PreconditionError(std::string(who) + ": series needs at least 4 values, got " + std::to_string(x.size()));
}

std::vector<double> centered(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] - mean;
  return c;
}

double lag_sum(const std::vector<double>& c, std::size_t lag) {
  double s = 0.0;
  for (std::size_t t = 0; t + lag < c.size(); ++t) s += c[t] * c[t + lag];
  return s / static_cast<double>(c.size());
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

}  // namespace

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  require_length(x, "autocovariance");
  if (max_lag >= x.size()) throw PreconditionError("autocovariance: max_lag must be below the series length");
  if (is_constant(x)) throw DegenerateSeriesError("autocovariance: series is constant");
  const std::vector<double> c = centered(x);
  std::vector<double> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = lag_sum(c, k);
  return out;
}

std::size_t initial_positive_pairs(std::span<const double> rho) {
  std::size_t m = 0;
  while (2 * m + 1 < rho.size() && rho[2 * m] + rho[2 * m + 1] > 0.0) ++m;
  return m;
}

EssEstimate ess_estimate(std::span<const double> x) {
  require_length(x, "ess_univariate");
  const double n = static_cast<double>(x.size());
  EssEstimate est;
  if (is_constant(x)) {
    est.ess = n;
    est.stuck = true;
    return est;
  }
  const std::vector<double> c = centered(x);
  const double c0 = lag_sum(c, 0);
  if (!(c0 > 0.0)) {  // variation below rounding after centering
    est.ess = n;
    est.stuck = true;
    return est;
  }
  // Autocorrelations are produced pair by pair, stopping at the first
  // non-positive pair, so a fast-mixing series costs only a few lags.
  double pair_sum = 0.0;
  std::size_t m = 0;
  for (; 2 * m + 1 < x.size(); ++m) {
    const double g = (lag_sum(c, 2 * m) + lag_sum(c, 2 * m + 1)) / c0;
    if (!(g > 0.0)) break;
    pair_sum += g;
  }
  const double tau = 2.0 * pair_sum - 1.0;
  est.ess = n / std::max(tau, 1.0);
  est.pairs_used = m;
  return est;
}

double ess_univariate(std::span<const double> x) { return ess_estimate(x).ess; }

EssReport min_ess_report(const Matrix& values, double elapsed_seconds, std::size_t iters, bool parallel) {
  const std::size_t n = values.rows();
  const std::size_t d = values.cols();
  if (n < 4) throw PreconditionError("min_ess_report: need at least 4 draws, got " + std::to_string(n));
  if (d == 0) throw PreconditionError("min_ess_report: no monitored quantities");
  if (!(elapsed_seconds > 0.0) || !std::isfinite(elapsed_seconds))
    throw PreconditionError("min_ess_report: elapsed time must be positive");
  if (iters == 0) throw PreconditionError("min_ess_report: iteration count must be positive");

  EssReport r;
  r.n = n;
  r.elapsed_seconds = elapsed_seconds;
  r.per_dim_ess.resize(d);
  std::vector<char> stuck(d, 0);
  auto column = [&](std::size_t j) {
    const EssEstimate e = ess_estimate(values.col(j));
    r.per_dim_ess[j] = e.ess;
    stuck[j] = e.stuck ? 1 : 0;
  };
  if (parallel) {
    const long long dd = static_cast<long long>(d);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long j = 0; j < dd; ++j) column(static_cast<std::size_t>(j));
  } else {
    for (std::size_t j = 0; j < d; ++j) column(j);
  }
  r.min_ess = *std::min_element(r.per_dim_ess.begin(), r.per_dim_ess.end());
  r.stuck = std::any_of(stuck.begin(), stuck.end(), [](char s) { return s != 0; });
  r.min_ess_per_iter = r.min_ess / static_cast<double>(iters);
  r.min_ess_per_sec = r.min_ess / elapsed_seconds;
  return r;
}

Matrix monitored_draws(const UnconstrainedTarget& target, const Matrix& draws, Foi foi) {
  if (draws.cols() != target.dim()) throw PreconditionError("monitored_draws: draw width does not match the target");
  Matrix out(draws.rows(), target.monitored_dim(foi));
  for (std::size_t i = 0; i < draws.rows(); ++i) {
    const std::vector<double> m = target.monitored(draws.row(i), foi);
    for (std::size_t j = 0; j < m.size(); ++j) out(i, j) = m[j];
  }
  return out;
}

}  // namespace stiefel
