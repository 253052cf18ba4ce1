#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stiefel/param.hpp"

namespace stiefel::bench {

struct CheckResult {
  std::string name;
  double value = 0.0;      // statistic compared against the threshold
  double threshold = 0.0;  // pass when value < threshold
  bool pass = false;
  std::string detail;
};

/// max ||U^T U - I||_F over `draws` Gaussian phi for every kind at
/// (5,2), (10,3), (50,3), (100,3).
std::vector<CheckResult> orthogonality_suite(std::uint64_t seed, std::size_t draws = 200, bool parallel = true);

/// Analytic gradient of every (model, kind) composite density against
/// central differences (step 1e-5) at `points` random points per pair, with
/// frames up to (6,3). Value: max of ||g - fd||_inf / max(1, ||fd||_inf).
std::vector<CheckResult> gradient_suite(std::uint64_t seed, std::size_t points = 10, bool parallel = true);

/// Spread (standard deviation) of log_adjust - 1/2 logdet(D^T D) over
/// `points` random phi at (4,2), with D a central-difference Jacobian.
/// Givens uses the angle coordinates and the angle part of log_adjust.
std::vector<CheckResult> jacobian_suite(std::uint64_t seed, std::size_t points = 10, bool parallel = true);

struct MomentsOptions {
  std::size_t J = 10;
  std::size_t K = 3;
  std::size_t chains = 4;
  std::size_t iters_total = 1000;
  std::size_t iters_keep = 500;
  double z_limit = 3.0;
};

/// Sample the uniform target with every kind and compare pooled E[u_jk] and
/// E[u_jk^2] with 0 and 1/J in units of the Monte Carlo standard error
/// (pooled variance over summed per-chain ESS). Value: largest |z|.
std::vector<CheckResult> uniform_moments_suite(std::uint64_t seed, const MomentsOptions& options = {},
                                               bool parallel = true);

/// Suite by name: orthogonality, gradients, jacobians, uniform-moments.
std::vector<CheckResult> run_suite(std::string_view name, std::uint64_t seed, bool parallel = true);

std::string format_check(const CheckResult& r);

}  // namespace stiefel::bench
