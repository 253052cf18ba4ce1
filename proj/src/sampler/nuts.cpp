#include "stiefel/nuts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "stiefel/errors.hpp"

namespace stiefel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogAcceptTarget = std::log(0.8);

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void draw_momentum(std::vector<double>& p, std::span<const double> inv_metric, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = z(rng) / std::sqrt(inv_metric[i]);
}

bool is_turning(const PhasePoint& minus, const PhasePoint& plus, std::span<const double> inv_metric) {
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < inv_metric.size(); ++i) {
    const double dq = plus.s.q[i] - minus.s.q[i];
    a += dq * inv_metric[i] * minus.p[i];
    b += dq * inv_metric[i] * plus.p[i];
  }
  return !(a >= 0.0 && b >= 0.0);
}

struct Subtree {
  PhasePoint minus;  // backward end
  PhasePoint plus;   // forward end
  State proposal;
  double log_weight = -kInf;
  double sum_accept = 0.0;
  std::size_t n_leapfrog = 0;
  bool divergent = false;
  bool turning = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const LogDensity& target, std::span<const double> inv_metric, double eps, double h0, double log_u,
              TrajectorySampling sampling, double max_energy_error, Rng& rng)
      : target_(target), inv_metric_(inv_metric), eps_(eps), h0_(h0), log_u_(log_u), sampling_(sampling),
        max_energy_error_(max_energy_error), rng_(rng) {}

  Subtree build(const PhasePoint& edge, int dir, int depth) {
    if (depth == 0) return leaf(edge, dir);
    Subtree first = build(edge, dir, depth - 1);
    if (first.divergent || first.turning) return first;
    Subtree second = build(dir > 0 ? first.plus : first.minus, dir, depth - 1);

    Subtree out;
    out.n_leapfrog = first.n_leapfrog + second.n_leapfrog;
    out.sum_accept = first.sum_accept + second.sum_accept;
    out.divergent = second.divergent;
    out.turning = second.turning;
    if (dir > 0) {
      out.minus = std::move(first.minus);
      out.plus = std::move(second.plus);
    } else {
      out.minus = std::move(second.minus);
      out.plus = std::move(first.plus);
    }
    if (second.divergent || second.turning) {
      out.proposal = std::move(first.proposal);
      out.log_weight = first.log_weight;
      return out;
    }
    out.log_weight = log_add_exp(first.log_weight, second.log_weight);
    // uniform (weight-proportional) choice inside a subtree
    const bool take_second = out.log_weight > -kInf && unif_(rng_) < std::exp(second.log_weight - out.log_weight);
    out.proposal = take_second ? std::move(second.proposal) : std::move(first.proposal);
    out.turning = is_turning(out.minus, out.plus, inv_metric_);
    return out;
  }

 private:
  Subtree leaf(const PhasePoint& edge, int dir) {
    Subtree t;
    PhasePoint z = edge;
    const bool ok = leapfrog(target_, z, dir * eps_, inv_metric_);
    double h = ok ? hamiltonian(z, inv_metric_) : kInf;
    if (!std::isfinite(h)) h = kInf;
    const double dh = h - h0_;
    t.n_leapfrog = 1;
    t.divergent = !(dh <= max_energy_error_);
    t.sum_accept = std::isfinite(h) ? std::min(1.0, std::exp(-dh)) : 0.0;
    if (sampling_ == TrajectorySampling::Multinomial) {
      t.log_weight = std::isfinite(h) ? -dh : -kInf;
    } else {
      t.log_weight = (log_u_ <= -h) ? 0.0 : -kInf;
    }
    t.proposal = z.s;
    t.minus = z;
    t.plus = std::move(z);
    return t;
  }

  const LogDensity& target_;
  std::span<const double> inv_metric_;
  double eps_;
  double h0_;
  double log_u_;
  TrajectorySampling sampling_;
  double max_energy_error_;
  Rng& rng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

// Streaming mean and variance (Welford).
class RunningVariance {
 public:
  explicit RunningVariance(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}
  void add(std::span<const double> x) {
    ++n_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean_[i];
      mean_[i] += d / static_cast<double>(n_);
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }
  std::size_t count() const { return n_; }
  /// Sample variance shrunk toward 1e-3, as in common NUTS implementations.
  std::vector<double> regularized() const {
    const double n = static_cast<double>(n_);
    std::vector<double> v(mean_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double var = m2_[i] / (n - 1.0);
      v[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
    }
    return v;
  }
  void reset() {
    n_ = 0;
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace

void SamplerConfig::validate() const {
  if (iters_keep < 1) throw PreconditionError("sampler: iters_keep must be at least 1");
  if (iters_keep > iters_total) throw PreconditionError("sampler: iters_keep must not exceed iters_total");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw PreconditionError("sampler: target_accept must be in (0, 1)");
  if (max_treedepth < 0) throw PreconditionError("sampler: max_treedepth must be non-negative");
  if (!(max_energy_error > 0.0)) throw PreconditionError("sampler: max_energy_error must be positive");
  if (!(init_scale >= 0.0)) throw PreconditionError("sampler: init_scale must be non-negative");
  if (init_attempts < 1) throw PreconditionError("sampler: init_attempts must be at least 1");
  if (!(initial_step >= 0.0) || !std::isfinite(initial_step)) throw PreconditionError("sampler: initial_step must be >= 0");
}

bool leapfrog(const LogDensity& target, PhasePoint& z, double eps, std::span<const double> inv_metric) {
  const std::size_t n = z.p.size();
  for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * eps * z.s.grad[i];
  for (std::size_t i = 0; i < n; ++i) z.s.q[i] += eps * inv_metric[i] * z.p[i];
  z.s.logp = target.log_density(z.s.q, z.s.grad);
  if (!std::isfinite(z.s.logp) || !all_finite(z.s.grad)) return false;
  for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * eps * z.s.grad[i];
  return true;
}

double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < z.p.size(); ++i) kinetic += inv_metric[i] * z.p[i] * z.p[i];
  return -z.s.logp + 0.5 * kinetic;
}

Transition nuts_draw(const LogDensity& target, const State& current, double step, std::span<const double> inv_metric,
                     int max_treedepth, TrajectorySampling sampling, double max_energy_error, Rng& rng) {
  if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionError("nuts_draw: step size must be positive and finite");
  if (inv_metric.size() != current.q.size()) throw PreconditionError("nuts_draw: metric has the wrong length");

  PhasePoint z0{current, std::vector<double>(current.q.size())};
  draw_momentum(z0.p, inv_metric, rng);
  const double h0 = hamiltonian(z0, inv_metric);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_u = sampling == TrajectorySampling::Slice ? std::log(unif(rng)) - h0 : 0.0;

  TreeBuilder builder(target, inv_metric, step, h0, log_u, sampling, max_energy_error, rng);
  PhasePoint minus = z0;
  PhasePoint plus = std::move(z0);
  Transition out;
  out.s = current;
  double log_w = 0.0;  // the starting point has weight exp(0) in both schemes
  double sum_accept = 0.0;

  for (int t = 0;; ++t) {
    const int dir = unif(rng) < 0.5 ? -1 : 1;
    Subtree sub = builder.build(dir > 0 ? plus : minus, dir, t);
    out.n_leapfrog += sub.n_leapfrog;
    sum_accept += sub.sum_accept;
    out.depth = t + 1;
    if (dir > 0) {
      plus = std::move(sub.plus);
    } else {
      minus = std::move(sub.minus);
    }
    if (sub.divergent) {
      out.divergent = true;
      break;
    }
    if (sub.turning) break;
    // biased progressive sampling between the old trajectory and the new subtree
    if (sub.log_weight > -kInf && std::log(unif(rng)) < sub.log_weight - log_w) out.s = std::move(sub.proposal);
    log_w = log_add_exp(log_w, sub.log_weight);
    if (is_turning(minus, plus, inv_metric)) break;
    if (t + 1 >= max_treedepth) break;
  }
  out.accept_stat = out.n_leapfrog > 0 ? sum_accept / static_cast<double>(out.n_leapfrog) : 0.0;
  return out;
}

DualAveragingState dual_averaging_start(double step) {
  DualAveragingState s;
  s.mu = std::log(10.0 * step);
  s.log_step = std::log(step);
  return s;
}

void dual_averaging_update(DualAveragingState& s, double accept_stat, double target_accept) {
  s.iteration += 1;
  const double m = static_cast<double>(s.iteration);
  const double eta = 1.0 / (m + s.t0);
  s.h_avg = (1.0 - eta) * s.h_avg + eta * (target_accept - accept_stat);
  s.log_step = s.mu - std::sqrt(m) / s.gamma * s.h_avg;
  const double w = std::pow(m, -s.kappa);
  s.log_step_avg = w * s.log_step + (1.0 - w) * s.log_step_avg;
}

double find_initial_step(const LogDensity& target, const State& at, double step, std::span<const double> inv_metric,
                         Rng& rng) {
  constexpr double kMinStep = 1e-12;
  constexpr double kMaxStep = 1e7;
  auto delta_at = [&](double eps) {
    PhasePoint z{at, std::vector<double>(at.q.size())};
    draw_momentum(z.p, inv_metric, rng);
    const double h0 = hamiltonian(z, inv_metric);
    if (!leapfrog(target, z, eps, inv_metric)) return -kInf;
    const double d = h0 - hamiltonian(z, inv_metric);
    return std::isfinite(d) ? d : -kInf;
  };
  const int dir = delta_at(step) > kLogAcceptTarget ? 1 : -1;
  for (int i = 0; i < 60; ++i) {
    const double next = dir > 0 ? 2.0 * step : 0.5 * step;
    if (next < kMinStep || next > kMaxStep) break;
    step = next;
    const double d = delta_at(step);
    if (dir > 0 ? !(d > kLogAcceptTarget) : d > kLogAcceptTarget) break;
  }
  return step;
}

ChainResult sample(const LogDensity& target, const SamplerConfig& cfg) {
  cfg.validate();
  const std::size_t dim = target.dim();
  if (dim == 0) throw PreconditionError("sample: target dimension must be at least 1");
  Rng rng(cfg.seed);
  const auto start = std::chrono::steady_clock::now();

  State state{std::vector<double>(dim), 0.0, std::vector<double>(dim)};
  bool found = false;
  {
    std::normal_distribution<double> z(0.0, 1.0);
    for (int attempt = 0; attempt < cfg.init_attempts && !found; ++attempt) {
      for (double& x : state.q) x = cfg.init_scale * z(rng);
      state.logp = target.log_density(state.q, state.grad);
      found = std::isfinite(state.logp) && all_finite(state.grad);
    }
  }
  if (!found) {
    throw SamplerError("sample: no initial point with finite log density after " +
                       std::to_string(cfg.init_attempts) + " attempts");
  }

  std::vector<double> inv_metric(dim, 1.0);
  double step = cfg.initial_step > 0.0 ? cfg.initial_step : find_initial_step(target, state, 1.0, inv_metric, rng);
  DualAveragingState da = dual_averaging_start(step);

  const std::size_t warmup = cfg.iters_total - cfg.iters_keep;
  const bool adapt_metric = cfg.mass_adaptation && warmup >= 20;
  const std::size_t window_start = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
  const std::size_t window_mid = static_cast<std::size_t>(0.5 * static_cast<double>(warmup));
  const std::size_t window_end = static_cast<std::size_t>(0.9 * static_cast<double>(warmup));
  RunningVariance window(dim);

  ChainResult result;
  result.seed = cfg.seed;
  for (std::size_t it = 0; it < warmup; ++it) {
    Transition tr = nuts_draw(target, state, step, inv_metric, cfg.max_treedepth, cfg.sampling,
                              cfg.max_energy_error, rng);
    state = std::move(tr.s);
    if (tr.divergent) ++result.warmup_divergences;
    dual_averaging_update(da, tr.accept_stat, cfg.target_accept);
    step = std::exp(da.log_step);
    if (adapt_metric && it >= window_start && it < window_end) {
      window.add(state.q);
      if ((it + 1 == window_mid || it + 1 == window_end) && window.count() >= 3) {
        inv_metric = window.regularized();
        window.reset();
        step = find_initial_step(target, state, step, inv_metric, rng);
        da = dual_averaging_start(step);
      }
    }
  }
  if (warmup > 0) {
    step = std::exp(da.log_step_avg);
    if (static_cast<double>(result.warmup_divergences) > 0.9 * static_cast<double>(warmup)) {
      throw SamplerError("sample: " + std::to_string(result.warmup_divergences) + " of " + std::to_string(warmup) +
                         " warmup transitions diverged; try a smaller initial step (initial_step)");
    }
  }

  result.draws = Matrix(cfg.iters_keep, dim);
  double accept_total = 0.0;
  for (std::size_t it = 0; it < cfg.iters_keep; ++it) {
    Transition tr = nuts_draw(target, state, step, inv_metric, cfg.max_treedepth, cfg.sampling,
                              cfg.max_energy_error, rng);
    state = std::move(tr.s);
    if (tr.divergent) ++result.divergences;
    accept_total += tr.accept_stat;
    std::copy(state.q.begin(), state.q.end(), result.draws.row(it).begin());
  }
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.step_size = step;
  result.inv_metric = std::move(inv_metric);
  result.mean_accept_stat = accept_total / static_cast<double>(cfg.iters_keep);
  return result;
}

}  // namespace stiefel
