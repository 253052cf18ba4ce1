#include <cstdio>
#include <filesystem>
#include <optional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stiefel/bench/checks.hpp"
#include "stiefel/bench/config.hpp"
#include "stiefel/bench/csv.hpp"
#include "stiefel/bench/experiment.hpp"
#include "stiefel/bench/synth.hpp"
#include "stiefel/bench/table.hpp"
#include "stiefel/errors.hpp"

namespace sb = stiefel::bench;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartialFailure = 2;
constexpr int kIoError = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir, std::size_t workers, bool resume,
            std::optional<std::size_t> limit) {
  const sb::BenchConfig cfg = sb::load_config(config_path);
  const std::string records = (std::filesystem::path(out_dir) / cfg.output).string();
  sb::RunOptions opt;
  opt.records_path = records;
  opt.workers = workers;
  opt.resume = resume;
  opt.limit = limit;
  std::size_t finished = 0;
  const std::size_t total = cfg.total_runs();
  opt.on_record = [&](const sb::RunRecord& r, const std::string& error) {
    ++finished;
    std::fprintf(stderr, "[%zu] %s J=%zu K=%zu %s run %zu: %s\n", finished, r.problem.c_str(), r.J, r.K,
                 std::string(stiefel::kind_name(r.kind)).c_str(), r.run_index,
                 r.failed ? ("failed: " + error).c_str() : ("minESS " + sb::format_double(r.min_ess)).c_str());
  };
  std::fprintf(stderr, "grid: %zu runs, records in %s\n", total, records.c_str());
  const sb::ExperimentResult res = sb::run_experiment(cfg, opt);
  std::fprintf(stderr, "executed %zu, skipped %zu, failed %zu%s\n", res.executed, res.skipped, res.failed,
               res.complete ? "" : " (grid incomplete)");
  if (!res.records.empty()) {
    for (auto [metric, name] : {std::pair{sb::Metric::PerIter, "per_iter"}, std::pair{sb::Metric::PerSec, "per_sec"}}) {
      const std::string text = sb::emit_table(res.records, metric, sb::TableFormat::Text);
      sb::write_text_file((std::filesystem::path(out_dir) / ("table_" + std::string(name) + ".txt")).string(), text);
      std::cout << text << '\n';
    }
  }
  return res.failed > 0 ? kPartialFailure : kOk;
}

int cmd_table(const std::string& records_path, const std::string& metric, const std::string& format) {
  const auto records = sb::read_records(records_path);
  if (records.empty()) throw stiefel::IoError(records_path + ": no records");
  std::cout << sb::emit_table(records, sb::parse_metric(metric), sb::parse_table_format(format));
  return kOk;
}

int cmd_check(const std::string& suite, std::uint64_t seed, bool serial) {
  const auto results = sb::run_suite(suite, seed, !serial);
  bool all = true;
  for (const auto& r : results) {
    std::cout << sb::format_check(r) << '\n';
    all = all && r.pass;
  }
  return all ? kOk : kPartialFailure;
}

int cmd_synth(const std::string& problem, std::uint64_t seed, const std::string& out, std::size_t J, std::size_t K,
              std::size_t T) {
  const std::filesystem::path path(out);
  if (problem == "ppca" || problem == "ppca2") {
    sb::PpcaSynthSpec spec = problem == "ppca" ? sb::ppca_synthetic1() : sb::ppca_synthetic2();
    if (J || K || T) throw stiefel::ConfigError("synth: ppca presets fix J, K and N");
    const auto ds = sb::synth_ppca(spec, seed);
    sb::save_csv_matrix(out, ds.data.y);
    std::cout << "wrote " << out << " (" << ds.data.y.rows() << " x " << ds.data.y.cols() << ")\n";
  } else if (problem == "eigenmodel") {
    sb::EigenSynthSpec spec;
    if (J) spec.J = J;
    if (K) spec.K = K;
    const auto ds = sb::synth_eigenmodel(spec, seed);
    sb::save_csv_matrix(out, ds.data.y);
    std::cout << "wrote " << out << " (" << spec.J << " x " << spec.J << " adjacency)\n";
  } else if (problem == "matrix_completion") {
    sb::McSynthSpec spec;
    if (J) spec.J = J;
    if (T) spec.T = T;
    if (K && K != spec.K) {
      spec.K = K;
      spec.lambda.resize(K, spec.lambda.back());
    }
    const auto ds = sb::synth_matrix_completion(spec, seed);
    sb::save_csv_matrix(out, ds.data.y, ds.data.missing, "NA");
    std::cout << "wrote " << out << " (" << spec.J << " x " << spec.T << ", missing cells NA)\n";
    for (std::size_t p = 0; p < ds.data.covariates.size(); ++p) {
      const auto cov = path.parent_path() / (path.stem().string() + "_x" + std::to_string(p + 1) + ".csv");
      sb::save_csv_matrix(cov.string(), ds.data.covariates[p]);
      std::cout << "wrote " << cov.string() << '\n';
    }
  } else {
    throw stiefel::ConfigError("synth: unknown problem '" + problem +
                               "' (expected ppca, ppca2, eigenmodel or matrix_completion)");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stiefel-manifold NUTS benchmark: parameterization grids, tables and oracle checks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a benchmark grid from a JSON config");
  std::string config_path;
  std::string out_dir = ".";
  std::size_t workers = 0;
  bool resume = false;
  std::optional<std::size_t> limit;
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "concurrent runs (0: OpenMP default)");
  run->add_flag("--resume", resume, "skip runs already in the records file");
  run->add_option("--limit", limit, "stop after this many new runs");

  auto* table = app.add_subcommand("table", "render a table from a records CSV");
  std::string records_path;
  std::string metric = "per_iter";
  std::string format = "text";
  table->add_option("--records", records_path, "records CSV")->required();
  table->add_option("--metric", metric, "per_iter or per_sec")->check(CLI::IsMember({"per_iter", "per_sec"}));
  table->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

  auto* check = app.add_subcommand("check", "run an oracle suite");
  std::string suite;
  std::uint64_t check_seed = 1;
  bool serial = false;
  check->add_option("--suite", suite, "orthogonality, gradients, jacobians or uniform-moments")
      ->required()
      ->check(CLI::IsMember({"orthogonality", "gradients", "jacobians", "uniform-moments"}));
  check->add_option("--seed", check_seed, "seed");
  check->add_flag("--serial", serial, "single-threaded reference path");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset as CSV");
  std::string problem;
  std::uint64_t synth_seed = 1;
  std::string out_path;
  std::size_t sJ = 0, sK = 0, sT = 0;
  synth->add_option("--problem", problem, "ppca, ppca2, eigenmodel or matrix_completion")->required();
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--out", out_path, "output CSV")->required();
  synth->add_option("--J", sJ, "rows");
  synth->add_option("--K", sK, "rank");
  synth->add_option("--T", sT, "panel length");

  app.add_subcommand("defaults", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, workers, resume, limit);
    if (*table) return cmd_table(records_path, metric, format);
    if (*check) return cmd_check(suite, check_seed, serial);
    if (*synth) return cmd_synth(problem, synth_seed, out_path, sJ, sK, sT);
    std::cout << sb::config_reference();
    return kOk;
  } catch (const stiefel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const stiefel::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const stiefel::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
}
