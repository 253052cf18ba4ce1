#include "stiefel/bench/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>

#include "stiefel/bench/synth.hpp"
#include "stiefel/errors.hpp"
#include "stiefel/ess.hpp"
#include "stiefel/linalg.hpp"
#include "stiefel/models.hpp"
#include "stiefel/nuts.hpp"
#include "stiefel/rng.hpp"
#include "stiefel/unconstrained.hpp"

namespace stiefel::bench {

namespace {

constexpr double kFdStep = 1e-5;

// Runs body(i) for i < n, spread over OpenMP threads when asked.
void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& body) {
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < nn; ++i) body(static_cast<std::size_t>(i));
}

std::vector<double> random_phi(const ParamSpec& spec, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> phi(phi_length(spec));
  if (spec.kind == Kind::Givens) {
    // |theta| <= 1.35 on either atan2 branch keeps |cos| >= 0.22, where
    // central differences with step 1e-5 are accurate to ~1e-8
    std::uniform_real_distribution<double> angle(-1.35, 1.35);
    std::bernoulli_distribution mirror(0.5);
    std::normal_distribution<double> radius(1.0, 0.1);
    for (std::size_t a = 0; a < phi.size() / 2; ++a) {
      const double th = angle(rng) + (mirror(rng) ? std::numbers::pi : 0.0);
      const double r = std::abs(radius(rng));
      phi[2 * a] = r * std::cos(th);
      phi[2 * a + 1] = r * std::sin(th);
    }
    return phi;
  }
  const double sd = spec.kind == Kind::Cayley ? 0.5 : 1.0;
  for (double& v : phi) v = sd * z(rng);
  return phi;
}

double rel_error_inf(std::span<const double> g, std::span<const double> ref) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    diff = std::max(diff, std::abs(g[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  return diff / std::max(1.0, scale);
}

Matrix fd_jacobian(const std::function<Matrix(std::span<const double>)>& f, std::span<const double> x, double h) {
  std::vector<double> probe(x.begin(), x.end());
  const std::size_t m = f(x).size();
  Matrix jac(m, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const auto up = f(probe).vec();
    probe[i] = orig - h;
    const auto down = f(probe).vec();
    probe[i] = orig;
    for (std::size_t r = 0; r < m; ++r) jac(r, i) = (up[r] - down[r]) / (2.0 * h);
  }
  return jac;
}

double stddev(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct NamedModel {
  std::string name;
  std::shared_ptr<const TargetModel> model;
};

std::vector<NamedModel> gradient_models(std::uint64_t seed) {
  std::vector<NamedModel> out;
  out.push_back({"uniform(6,3)", std::make_shared<UniformModel>(6, 3)});

  PpcaSynthSpec ps{20, 6, 3, {3.0, 2.0, 1.0}, 0.5, true};
  PpcaData pd = synth_ppca(ps, mix_seed(seed, {1})).data;
  out.push_back({"ppca(6,3)", std::make_shared<PpcaModel>(pd)});
  pd.ordered_lambda = false;
  pd.with_mean = false;
  out.push_back({"ppca-unordered(6,3)", std::make_shared<PpcaModel>(pd)});

  EigenSynthSpec es;
  es.J = 6;
  es.K = 3;
  out.push_back({"eigenmodel(6,3)", std::make_shared<EigenmodelModel>(synth_eigenmodel(es, mix_seed(seed, {2})).data)});

  McSynthSpec ms;
  ms.J = 6;
  ms.T = 5;
  ms.K = 3;
  ms.lambda = {4.0, 2.5, 1.5};
  ms.missing_fraction = 0.2;
  out.push_back({"matrix_completion(6x5,3)",
                 std::make_shared<MatrixCompletionModel>(synth_matrix_completion(ms, mix_seed(seed, {3})).data)});
  return out;
}

}  // namespace

std::vector<CheckResult> orthogonality_suite(std::uint64_t seed, std::size_t draws, bool parallel) {
  const std::vector<std::pair<std::size_t, std::size_t>> shapes{{5, 2}, {10, 3}, {50, 3}, {100, 3}};
  std::vector<ParamSpec> specs;
  for (Kind k : kAllKinds)
    for (const auto& [J, K] : shapes) specs.push_back({k, J, K});
  std::vector<CheckResult> out(specs.size());
  for_each_index(specs.size(), parallel, [&](std::size_t i) {
    const ParamSpec& spec = specs[i];
    Rng rng(mix_seed(seed, {fnv1a("orthogonality"), static_cast<std::uint64_t>(spec.kind), spec.J, spec.K}));
    double worst = 0.0;
    for (std::size_t d = 0; d < draws; ++d) worst = std::max(worst, orthogonality_error(evaluate(spec, random_phi(spec, rng)).upsilon));
    CheckResult& r = out[i];
    r.name = "orthogonality " + std::string(kind_name(spec.kind)) + " (" + std::to_string(spec.J) + "," +
             std::to_string(spec.K) + ")";
    r.value = worst;
    r.threshold = 1e-9;
    r.pass = worst < r.threshold;
    r.detail = std::to_string(draws) + " draws";
  });
  return out;
}

std::vector<CheckResult> gradient_suite(std::uint64_t seed, std::size_t points, bool parallel) {
  const std::vector<NamedModel> models = gradient_models(seed);
  struct Pair {
    std::size_t model;
    Kind kind;
  };
  std::vector<Pair> pairs;
  for (std::size_t m = 0; m < models.size(); ++m)
    for (Kind k : kAllKinds) pairs.push_back({m, k});

  std::vector<CheckResult> out(pairs.size());
  for_each_index(pairs.size(), parallel, [&](std::size_t i) {
    const auto& nm = models[pairs[i].model];
    const Kind kind = pairs[i].kind;
    const auto target = build_unconstrained(nm.model, kind);
    Rng rng(mix_seed(seed, {fnv1a(nm.name), static_cast<std::uint64_t>(kind)}));
    std::normal_distribution<double> z(0.0, 0.5);
    double worst = 0.0;
    std::size_t bad_points = 0;
    for (std::size_t p = 0; p < points; ++p) {
      std::vector<double> q(target->dim());
      for (std::size_t b = 0; b < target->specs().size(); ++b) {
        const auto phi = random_phi(target->specs()[b], rng);
        std::copy(phi.begin(), phi.end(), q.begin() + static_cast<long>(target->stiefel_offset(b)));
      }
      if (!target->model().aux_blocks().empty())
        for (std::size_t j = target->aux_offset(0); j < q.size(); ++j) q[j] = z(rng);
      std::vector<double> grad(q.size());
      const double lp = target->log_density(q, grad);
      if (!std::isfinite(lp)) {
        ++bad_points;
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      std::vector<double> fd(q.size());
      std::vector<double> probe = q;
      for (std::size_t j = 0; j < q.size(); ++j) {
        probe[j] = q[j] + kFdStep;
        const double up = target->log_density(probe, {});
        probe[j] = q[j] - kFdStep;
        const double down = target->log_density(probe, {});
        probe[j] = q[j];
        fd[j] = (up - down) / (2.0 * kFdStep);
      }
      worst = std::max(worst, rel_error_inf(grad, fd));
    }
    CheckResult& r = out[i];
    r.name = "gradient " + nm.name + " " + std::string(kind_name(kind));
    r.value = worst;
    r.threshold = 1e-6;
    r.pass = worst < r.threshold;
    r.detail = std::to_string(points) + " points, dim " + std::to_string(target->dim());
    if (bad_points) r.detail += ", " + std::to_string(bad_points) + " non-finite";
  });
  return out;
}

std::vector<CheckResult> jacobian_suite(std::uint64_t seed, std::size_t points, bool parallel) {
  const std::size_t J = 4;
  const std::size_t K = 2;
  const std::vector<Kind> kinds{Kind::Cayley, Kind::Givens};
  std::vector<CheckResult> out(kinds.size());
  for_each_index(kinds.size(), parallel, [&](std::size_t i) {
    const Kind kind = kinds[i];
    const ParamSpec spec{kind, J, K};
    Rng rng(mix_seed(seed, {fnv1a("jacobian"), static_cast<std::uint64_t>(kind)}));
    std::vector<double> offsets;
    for (std::size_t p = 0; p < points; ++p) {
      const std::vector<double> phi = random_phi(spec, rng);
      if (kind == Kind::Cayley) {
        const Matrix jac = fd_jacobian([&](std::span<const double> x) { return evaluate(spec, x).upsilon; }, phi, 1e-6);
        offsets.push_back(evaluate(spec, phi).log_adjust - 0.5 * log_abs_det(matmul_tn(jac, jac)));
      } else {
        const GivensAngles ang = givens_angles(phi, J, K);
        const Matrix jac = fd_jacobian(
            [&](std::span<const double> t) { return givens_upsilon_from_angles(t, J, K); }, ang.theta, 1e-6);
        offsets.push_back(givens_log_jacobian(ang.theta, J, K) - 0.5 * log_abs_det(matmul_tn(jac, jac)));
      }
    }
    CheckResult& r = out[i];
    r.name = "jacobian " + std::string(kind_name(kind)) + " (4,2)";
    r.value = stddev(offsets);
    r.threshold = 1e-4;
    r.pass = r.value < r.threshold;
    r.detail = std::to_string(points) + " points";
  });
  return out;
}

std::vector<CheckResult> uniform_moments_suite(std::uint64_t seed, const MomentsOptions& o, bool parallel) {
  const std::size_t nk = std::size(kAllKinds);
  const std::size_t d = o.J * o.K;
  // draws[kind][chain] = iters_keep x (J K) frame entries, column-major per draw
  std::vector<std::vector<Matrix>> frames(nk, std::vector<Matrix>(o.chains));
  std::vector<std::string> errors(nk);
  const auto model = std::make_shared<UniformModel>(o.J, o.K);
  for_each_index(nk * o.chains, parallel, [&](std::size_t t) {
    const std::size_t k = t / o.chains;
    const std::size_t c = t % o.chains;
    const Kind kind = kAllKinds[k];
    try {
      const auto target = build_unconstrained(model, kind);
      SamplerConfig sc;
      sc.iters_total = o.iters_total;
      sc.iters_keep = o.iters_keep;
      sc.seed = chain_seed(mix_seed(seed, {fnv1a("uniform-moments"), static_cast<std::uint64_t>(kind)}), c);
      frames[k][c] = monitored_draws(*target, sample(*target, sc).draws, Foi::StiefelOnly);
    } catch (const std::exception& e) {
#pragma omp critical(stiefel_moments_error)
      errors[k] = e.what();
    }
  });

  std::vector<CheckResult> out;
  for (std::size_t k = 0; k < nk; ++k) {
    CheckResult r;
    r.name = "uniform moments " + std::string(kind_name(kAllKinds[k])) + " (" + std::to_string(o.J) + "," +
             std::to_string(o.K) + ")";
    r.threshold = o.z_limit;
    if (!errors[k].empty()) {
      r.value = std::numeric_limits<double>::infinity();
      r.detail = "sampling failed: " + errors[k];
      out.push_back(r);
      continue;
    }
    double worst = 0.0;
    std::size_t worst_entry = 0;
    bool worst_square = false;
    for (std::size_t e = 0; e < d; ++e) {
      for (bool square : {false, true}) {
        double ess_total = 0.0;
        double sum = 0.0;
        double sum_sq = 0.0;
        std::size_t n = 0;
        for (std::size_t c = 0; c < o.chains; ++c) {
          std::vector<double> x = frames[k][c].col(e);
          if (square)
            for (double& v : x) v *= v;
          ess_total += ess_univariate(x);
          for (double v : x) {
            sum += v;
            sum_sq += v * v;
          }
          n += x.size();
        }
        const double mean = sum / static_cast<double>(n);
        const double var = (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
        const double se = std::sqrt(std::max(var, 0.0) / ess_total);
        const double expected = square ? 1.0 / static_cast<double>(o.J) : 0.0;
        const double z = se > 0.0 ? std::abs(mean - expected) / se : std::numeric_limits<double>::infinity();
        if (z > worst) {
          worst = z;
          worst_entry = e;
          worst_square = square;
        }
      }
    }
    r.value = worst;
    r.pass = worst < r.threshold;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu chains x %zu draws; worst %s of entry (%zu,%zu)", o.chains, o.iters_keep,
                  worst_square ? "E[u^2]" : "E[u]", worst_entry % o.J, worst_entry / o.J);
    r.detail = buf;
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> run_suite(std::string_view name, std::uint64_t seed, bool parallel) {
  if (name == "orthogonality") return orthogonality_suite(seed, 200, parallel);
  if (name == "gradients") return gradient_suite(seed, 10, parallel);
  if (name == "jacobians") return jacobian_suite(seed, 10, parallel);
  if (name == "uniform-moments") return uniform_moments_suite(seed, {}, parallel);
  throw ConfigError("unknown check suite '" + std::string(name) +
                    "' (expected orthogonality, gradients, jacobians or uniform-moments)");
}

std::string format_check(const CheckResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g < %.3g", r.value, r.threshold);
  return std::string(r.pass ? "PASS " : "FAIL ") + r.name + ": " + buf + (r.detail.empty() ? "" : "  [" + r.detail + "]");
}

}  // namespace stiefel::bench
