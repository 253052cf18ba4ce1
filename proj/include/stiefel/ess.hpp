#pragma once

#include <span>
#include <vector>

#include "stiefel/matrix.hpp"
#include "stiefel/unconstrained.hpp"

namespace stiefel {

/// Biased (1/n) sample autocovariances at lags 0..max_lag by direct summation.
/// Requires length >= 4 and max_lag < length; throws DegenerateSeriesError
/// for a constant series.
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag);

/// Number of leading pairs Gamma_m = rho[2m] + rho[2m+1] that are positive.
/// `rho` holds autocorrelations from lag 0; an incomplete final pair is ignored.
std::size_t initial_positive_pairs(std::span<const double> rho);

struct EssEstimate {
  double ess = 0.0;
  bool stuck = false;          // constant series, reported as ess = n
  std::size_t pairs_used = 0;  // initial positive sequence length
};

/// Geyer initial-positive-sequence ESS, clamped to (0, n].
EssEstimate ess_estimate(std::span<const double> x);
double ess_univariate(std::span<const double> x);

struct EssReport {
  std::vector<double> per_dim_ess;
  double min_ess = 0.0;
  double min_ess_per_iter = 0.0;
  double min_ess_per_sec = 0.0;
  std::size_t n = 0;
  double elapsed_seconds = 0.0;
  bool stuck = false;  // some monitored column was constant
};

/// ESS of every column of `values` (n x d), minimum, and the normalizations
/// min/iters and min/elapsed. The parallel flag spreads columns over OpenMP
/// threads; results are identical to the serial path.
EssReport min_ess_report(const Matrix& values, double elapsed_seconds, std::size_t iters, bool parallel = true);

/// Function-of-interest values for each raw draw (row) of `target`.
Matrix monitored_draws(const UnconstrainedTarget& target, const Matrix& draws, Foi foi);

inline EssReport min_ess_report(const UnconstrainedTarget& target, const Matrix& draws, double elapsed_seconds,
                                std::size_t iters, Foi foi, bool parallel = true) {
  return min_ess_report(monitored_draws(target, draws, foi), elapsed_seconds, iters, parallel);
}

}  // namespace stiefel
