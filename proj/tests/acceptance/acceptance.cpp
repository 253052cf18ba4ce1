// Acceptance run: one PASS/FAIL line per criterion. Every seed below is fixed.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stiefel/bench/checks.hpp"
#include "stiefel/bench/config.hpp"
#include "stiefel/bench/experiment.hpp"
#include "stiefel/bench/synth.hpp"
#include "stiefel/bench/table.hpp"
#include "stiefel/errors.hpp"
#include "stiefel/ess.hpp"
#include "stiefel/linalg.hpp"
#include "stiefel/nuts.hpp"
#include "support/densities.hpp"

using namespace stiefel;
using namespace stiefel::bench;

namespace {

constexpr std::uint64_t kSeed = 2026;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome check_list(const std::vector<CheckResult>& results) {
  Outcome out{true, ""};
  double worst = 0.0;
  std::string worst_name;
  for (const auto& r : results) {
    if (!r.pass) {
      out.pass = false;
      out.detail += r.name + " " + fmt("%.3g", r.value) + "; ";
    }
    if (r.value >= worst) {
      worst = r.value;
      worst_name = r.name;
    }
  }
  out.detail += std::to_string(results.size()) + " checks, worst " + worst_name + " = " + fmt("%.3g", worst);
  return out;
}

Outcome criterion_orthogonality() { return check_list(orthogonality_suite(kSeed)); }
Outcome criterion_gradients() { return check_list(gradient_suite(kSeed)); }
Outcome criterion_jacobians() { return check_list(jacobian_suite(kSeed)); }
Outcome criterion_moments() { return check_list(uniform_moments_suite(kSeed)); }

std::vector<double> ar1(std::size_t n, double rho, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n);
  x[0] = z(rng) / std::sqrt(1.0 - rho * rho);
  for (std::size_t t = 1; t < n; ++t) x[t] = rho * x[t - 1] + z(rng);
  return x;
}

Outcome criterion_calibration() {
  const std::size_t dim = 10;
  const auto target = testing::DiagNormal::standard(dim);
  SamplerConfig cfg;
  cfg.seed = kSeed;
  const ChainResult chain = sample(target, cfg);
  const std::size_t n = chain.draws.rows();
  double worst_mean = 0.0, worst_var = 1.0;
  bool ok = true;
  for (std::size_t d = 0; d < dim; ++d) {
    const auto x = chain.draws.col(d);
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - m) * (v - m);
    var /= static_cast<double>(n - 1);
    ok = ok && std::abs(m) < 0.1 && var >= 0.85 && var <= 1.15;
    worst_mean = std::max(worst_mean, std::abs(m));
    if (std::abs(var - 1.0) > std::abs(worst_var - 1.0)) worst_var = var;
  }
  const double rho = 0.9;
  const double expected = (1.0 - rho) / (1.0 + rho);
  const auto series = ar1(100000, rho, kSeed);
  const double ratio = ess_univariate(series) / static_cast<double>(series.size());
  const bool ar_ok = std::abs(ratio - expected) <= 0.2 * expected;
  return {ok && ar_ok, "max |mean| " + fmt("%.3f", worst_mean) + ", furthest variance " + fmt("%.3f", worst_var) +
                           ", AR(1) ess/n " + fmt("%.5f", ratio) + " (oracle " + fmt("%.5f", expected) + ")"};
}

BenchConfig uniform_grid(std::uint64_t base_seed) {
  BenchConfig cfg = parse_config(R"({"problems": [{"problem": "uniform", "J": 100, "K": 3}], "kinds": "all", "runs": 8})");
  cfg.base_seed = base_seed;
  return cfg;
}

// criterion 6 results are reused by criterion 10
std::vector<RunRecord> g_first_grid;

Outcome criterion_uniform_ordering() {
  std::size_t polar_first = 0;
  std::string detail;
  for (std::uint64_t rep = 1; rep <= 8; ++rep) {
    const ExperimentResult res = run_experiment(uniform_grid(rep), {});
    if (rep == 1) g_first_grid = res.records;
    const auto rows = summarize(res.records, Metric::PerSec);
    const bool first = rows.size() == 1 && rows[0].best == Kind::Polar;
    polar_first += first ? 1 : 0;
    if (!rows.empty() && rows[0].best) detail += std::string(kind_name(*rows[0].best)).substr(0, 1);
  }
  return {polar_first >= 7, "polar best in " + std::to_string(polar_first) + "/8 repetitions (winners " + detail + ")"};
}

// Column signs of each draw aligned with the reference frame; the PPCA
// likelihood is invariant to flipping a column of W.
Matrix sign_aligned(const Matrix& w, const Matrix& ref) {
  Matrix out = w;
  for (std::size_t k = 0; k < w.cols(); ++k) {
    double d = 0.0;
    for (std::size_t j = 0; j < w.rows(); ++j) d += w(j, k) * ref(j, k);
    if (d < 0.0)
      for (std::size_t j = 0; j < w.rows(); ++j) out(j, k) = -w(j, k);
  }
  return out;
}

double largest_principal_angle_deg(const Matrix& a, const Matrix& truth) {
  const Matrix q = svd(a).u;  // orthonormal basis of span(a)
  const Svd s = svd(matmul_tn(truth, q));
  const double c = std::clamp(s.s.back(), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

Outcome criterion_ppca() {
  const PpcaDataset ds = synth_ppca(ppca_synthetic1(), kSeed);
  auto model = std::make_shared<PpcaModel>(ds.data);
  auto target = build_unconstrained(model, Kind::Polar);
  SamplerConfig cfg;
  cfg.seed = kSeed;
  const ChainResult chain = sample(*target, cfg);
  const std::size_t n = chain.draws.rows();
  Matrix w_mean(ds.w_true.rows(), ds.w_true.cols());
  std::vector<double> lambda_mean(2, 0.0);
  Matrix ref;
  for (std::size_t i = 0; i < n; ++i) {
    const ModelPoint p = target->constrained(chain.draws.row(i));
    if (i == 0) ref = p.stiefel[0];
    w_mean += sign_aligned(p.stiefel[0], ref);
    std::vector<double> l = p.aux[PpcaModel::kLambda];
    std::sort(l.rbegin(), l.rend());
    for (std::size_t k = 0; k < 2; ++k) lambda_mean[k] += l[k];
  }
  w_mean *= 1.0 / static_cast<double>(n);
  for (double& l : lambda_mean) l /= static_cast<double>(n);
  const double angle = largest_principal_angle_deg(w_mean, ds.w_true);
  bool ok = angle < 5.0;
  for (std::size_t k = 0; k < 2; ++k)
    ok = ok && std::abs(lambda_mean[k] - ds.lambda_true[k]) <= 0.1 * ds.lambda_true[k];
  return {ok, "lambda mean (" + fmt("%.3f", lambda_mean[0]) + ", " + fmt("%.3f", lambda_mean[1]) +
                  "), largest principal angle " + fmt("%.3f", angle) + " deg, divergences " +
                  std::to_string(chain.divergences)};
}

Outcome criterion_matrix_completion() {
  const McDataset ds = synth_matrix_completion({}, kSeed);
  auto model = std::make_shared<MatrixCompletionModel>(ds.data);
  const auto& cells = model->missing_cells();
  const std::size_t miss = *model->y_miss_index();
  bool ok = true;
  double lo = INFINITY, hi = 0.0;
  std::string detail;
  for (Kind kind : kAllKinds) {
    auto target = build_unconstrained(model, kind);
    SamplerConfig cfg;
    cfg.seed = mix_seed(kSeed, {static_cast<std::uint64_t>(kind)});
    detail += std::string(kind_name(kind)) + ": ";
    try {
      const ChainResult chain = sample(*target, cfg);
      const std::size_t n = chain.draws.rows();
      std::vector<double> imputed(cells.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const ModelPoint p = target->constrained(chain.draws.row(i));
        for (std::size_t c = 0; c < cells.size(); ++c) imputed[c] += p.aux[miss][c];
      }
      double sse = 0.0;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const double e = imputed[c] / static_cast<double>(n) - ds.y_full(cells[c].first, cells[c].second);
        sse += e * e;
      }
      const double rmse = std::sqrt(sse / static_cast<double>(cells.size()));
      const EssReport rep =
          min_ess_report(*target, chain.draws, chain.elapsed_seconds, cfg.iters_keep, Foi::All, false);
      ok = ok && rmse < 2.0 * ds.sigma_true;
      lo = std::min(lo, rep.min_ess_per_iter);
      hi = std::max(hi, rep.min_ess_per_iter);
      detail += "rmse " + fmt("%.3f", rmse) + " ess/iter " + fmt("%.3f", rep.min_ess_per_iter) + " div " +
                std::to_string(chain.divergences) + "; ";
    } catch (const SamplerError& e) {
      ok = false;
      lo = 0.0;
      detail += std::string("sampler error (") + e.what() + "); ";
    }
  }
  const bool spread_ok = lo > 0.0 && hi <= 3.0 * lo;
  return {ok && spread_ok, detail + "rmse bound " + fmt("%.3f", 2.0 * ds.sigma_true) + ", ess/iter ratio " +
                               (lo > 0.0 ? fmt("%.2f", hi / lo) : std::string("inf"))};
}

Outcome criterion_eigenmodel() {
  BenchConfig cfg = parse_config(R"({"problems": [{"problem": "eigenmodel", "J": 30, "K": 3}], "kinds": "all", "runs": 1})");
  cfg.base_seed = kSeed;
  std::string errors;
  RunOptions opt;
  opt.on_record = [&](const RunRecord& r, const std::string& err) {
    if (!err.empty()) errors += std::string(kind_name(r.kind)) + ": " + err + "; ";
  };
  const ExperimentResult res = run_experiment(cfg, opt);
  bool ok = res.complete && res.records.size() == 4;
  std::string detail;
  for (const auto& r : res.records) {
    const double frac = static_cast<double>(r.divergences) / static_cast<double>(std::max<std::size_t>(r.iters_kept, 1));
    const bool finite = std::isfinite(r.min_ess) && std::isfinite(r.min_ess_per_sec);
    ok = ok && !r.failed && r.iters_total == 1000 && frac < 0.5 && (finite || r.stuck);
    detail += std::string(kind_name(r.kind)) + (r.failed ? " failed" : "") + " div " + fmt("%.3f", frac) +
              " minESS " + fmt("%.1f", r.min_ess) + "; ";
  }
  return {ok, detail + errors};
}

Outcome criterion_determinism() {
  if (g_first_grid.empty()) g_first_grid = run_experiment(uniform_grid(1), {}).records;
  const auto rerun = run_experiment(uniform_grid(1), {}).records;
  bool same = rerun.size() == g_first_grid.size();
  for (std::size_t i = 0; same && i < rerun.size(); ++i)
    same = key_of(rerun[i]) == key_of(g_first_grid[i]) && rerun[i].seed == g_first_grid[i].seed &&
           std::bit_cast<std::uint64_t>(rerun[i].min_ess) == std::bit_cast<std::uint64_t>(g_first_grid[i].min_ess);

  const auto dir = std::filesystem::temp_directory_path() / "stiefel_acceptance";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "records.csv").string();
  std::filesystem::remove(path);
  RunOptions first;
  first.records_path = path;
  first.limit = 11;
  const ExperimentResult partial = run_experiment(uniform_grid(1), first);
  RunOptions second;
  second.records_path = path;
  second.resume = true;
  const ExperimentResult resumed = run_experiment(uniform_grid(1), second);
  const auto from_file = read_records(path);
  bool resume_same = !partial.complete && resumed.complete && resumed.skipped == partial.executed &&
                     from_file.size() == g_first_grid.size();
  for (std::size_t i = 0; resume_same && i < from_file.size(); ++i) {
    RunRecord a = from_file[i], b = g_first_grid[i];
    a.elapsed_seconds = b.elapsed_seconds = 0.0;  // wall clock differs between runs
    a.min_ess_per_sec = b.min_ess_per_sec = 0.0;
    resume_same = format_record(a) == format_record(b);
  }
  std::filesystem::remove_all(dir);
  return {same && resume_same, std::string("rerun ") + (same ? "bitwise identical" : "differs") + ", resume after " +
                                   std::to_string(partial.executed) + " runs " +
                                   (resume_same ? "identical" : "differs")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "orthogonality", 60, criterion_orthogonality},
      {2, "gradients", 300, criterion_gradients},
      {3, "jacobian oracle", 60, criterion_jacobians},
      {4, "uniform moments", 600, criterion_moments},
      {5, "sampler calibration", 120, criterion_calibration},
      {6, "uniform ordering", 3600, criterion_uniform_ordering},
      {7, "ppca synthetic", 900, criterion_ppca},
      {8, "matrix completion", 1800, criterion_matrix_completion},
      {9, "eigenmodel smoke", 1200, criterion_eigenmodel},
      {10, "determinism and resume", 3600, criterion_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_seconds) {
      out.pass = false;
      out.detail += " [over the " + fmt("%.0f", c.limit_seconds) + " s limit]";
    }
    failures += out.pass ? 0 : 1;
    std::printf("criterion %d %s: %s (%.1f s) %s\n", c.id, c.name, out.pass ? "PASS" : "FAIL", secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
