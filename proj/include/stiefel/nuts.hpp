#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stiefel/density.hpp"
#include "stiefel/matrix.hpp"
#include "stiefel/rng.hpp"

namespace stiefel {

enum class TrajectorySampling { Multinomial, Slice };

struct SamplerConfig {
  std::size_t iters_total = 1000;
  std::size_t iters_keep = 500;
  double target_accept = 0.8;
  int max_treedepth = 10;
  bool mass_adaptation = true;
  std::uint64_t seed = 0;
  TrajectorySampling sampling = TrajectorySampling::Multinomial;
  double max_energy_error = 1000.0;
  double init_scale = 0.1;     // initial point ~ init_scale * N(0, I)
  int init_attempts = 100;     // redraws while the initial density is not finite
  double initial_step = 0.0;   // > 0: start from this step instead of the heuristic

  /// Throws PreconditionError naming the offending field.
  void validate() const;
};

/// Position, log density and gradient at one point of a trajectory.
struct State {
  std::vector<double> q;
  double logp = 0.0;
  std::vector<double> grad;
};

struct PhasePoint {
  State s;
  std::vector<double> p;
};

/// One kick-drift-kick step with diagonal inverse metric. Returns false when
/// the new log density or gradient is not finite.
bool leapfrog(const LogDensity& target, PhasePoint& z, double eps, std::span<const double> inv_metric);

/// -log p(q) + p^T M^{-1} p / 2
double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric);

struct Transition {
  State s;
  double accept_stat = 0.0;
  int depth = 0;           // number of doublings performed
  std::size_t n_leapfrog = 0;
  bool divergent = false;
};

/// One NUTS transition from `current`. Random numbers are consumed as: the
/// momentum (one std::normal_distribution, dim draws), then per doubling a
/// direction and a proposal-acceptance uniform.
/// max_treedepth <= 1 performs a single leapfrog step with a Metropolis choice.
Transition nuts_draw(const LogDensity& target, const State& current, double step, std::span<const double> inv_metric,
                     int max_treedepth, TrajectorySampling sampling, double max_energy_error, Rng& rng);

struct DualAveragingState {
  double mu = 0.0;
  double log_step = 0.0;
  double log_step_avg = 0.0;
  double h_avg = 0.0;
  std::size_t iteration = 0;
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;
};

/// Fresh adaptation state targeting mu = log(10 * step).
DualAveragingState dual_averaging_start(double step);
void dual_averaging_update(DualAveragingState& state, double accept_stat, double target_accept);

/// Doubles or halves `step` until one leapfrog step crosses acceptance 0.8.
double find_initial_step(const LogDensity& target, const State& at, double step, std::span<const double> inv_metric,
                         Rng& rng);

struct ChainResult {
  Matrix draws;  // iters_keep x dim, unconstrained
  std::size_t divergences = 0;          // during the kept iterations
  std::size_t warmup_divergences = 0;
  double step_size = 0.0;
  std::vector<double> inv_metric;
  double mean_accept_stat = 0.0;        // over kept iterations
  double elapsed_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Warmup (iters_total - iters_keep iterations) with step-size and optional
/// diagonal metric adaptation, then iters_keep kept draws.
/// Throws SamplerError when more than 90% of warmup transitions diverge or
/// no finite initial point is found.
ChainResult sample(const LogDensity& target, const SamplerConfig& cfg);

}  // namespace stiefel
