#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stiefel/bench/config.hpp"
#include "stiefel/model.hpp"

namespace stiefel::bench {

struct RunRecord {
  std::string problem;
  std::size_t J = 0;
  std::size_t K = 0;
  std::size_t T = 0;
  Kind kind = Kind::Polar;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::size_t iters_total = 0;
  std::size_t iters_kept = 0;
  double elapsed_seconds = 0.0;
  double min_ess = 0.0;
  double min_ess_per_iter = 0.0;
  double min_ess_per_sec = 0.0;
  std::size_t divergences = 0;
  bool stuck = false;
  bool failed = false;
};

/// Identity of a run within a grid: (problem, J, K, T, kind, run_index).
struct RunKey {
  std::string problem;
  std::size_t J = 0;
  std::size_t K = 0;
  std::size_t T = 0;
  Kind kind = Kind::Polar;
  std::size_t run_index = 0;
  auto operator<=>(const RunKey&) const = default;
};

RunKey key_of(const RunRecord& r);

/// The fixed records header.
std::string_view record_header();
std::string format_record(const RunRecord& r);
/// Throws IoError naming the line for malformed input.
std::vector<RunRecord> parse_records(std::string_view text);
std::vector<RunRecord> read_records(const std::string& path);
/// Sorted by key, written through a temporary file.
void write_records(const std::string& path, std::vector<RunRecord> records);

/// A grid instance with sizes resolved (from its data file when given).
struct PreparedProblem {
  ProblemConfig cfg;
  std::shared_ptr<const TargetModel> model;  // null when data are regenerated per run
};

/// Builds the target model of a problem from its config and data seed.
using ModelFactory = std::function<std::shared_ptr<const TargetModel>(const ProblemConfig&, std::uint64_t)>;

/// `factory` defaults to build_model.
std::vector<PreparedProblem> prepare_problems(const BenchConfig& cfg, const ModelFactory& factory = {});

/// Target model for one problem; synthetic data use `data_seed`.
std::shared_ptr<const TargetModel> build_model(const ProblemConfig& p, std::uint64_t data_seed);

std::uint64_t run_seed(std::uint64_t base_seed, const ProblemConfig& p, Kind kind, std::size_t run_index);
std::uint64_t data_seed(std::uint64_t base_seed, const ProblemConfig& p, std::optional<std::size_t> run_index);

/// Sample and diagnose one run. Failures are returned as failed records.
RunRecord execute_run(const BenchConfig& cfg, const PreparedProblem& problem, Kind kind, std::size_t run_index,
                      std::string* error = nullptr, const ModelFactory& factory = {});

struct RunOptions {
  std::string records_path;                  // incremental output; empty keeps records in memory only
  std::size_t workers = 0;                   // overrides cfg.workers when nonzero
  bool resume = false;                       // skip runs already present in records_path
  std::optional<std::size_t> limit;          // stop after this many new runs
  std::function<void(const RunRecord&, const std::string& error)> on_record;
  ModelFactory model_factory;                // custom targets; empty uses build_model
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // every record in the file, sorted
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;  // among all records
  bool complete = false;   // every grid run has a record
};

ExperimentResult run_experiment(const BenchConfig& cfg, const RunOptions& options);

}  // namespace stiefel::bench
