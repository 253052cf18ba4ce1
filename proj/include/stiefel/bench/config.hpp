#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stiefel/nuts.hpp"
#include "stiefel/param.hpp"
#include "stiefel/unconstrained.hpp"

namespace stiefel::bench {

enum class ProblemKind { Uniform, Ppca, Eigenmodel, MatrixCompletion };

std::string_view problem_name(ProblemKind kind);  // "uniform", "ppca", ...
ProblemKind parse_problem(std::string_view name);

/// One (problem, J, K, T) instance of the grid after list expansion.
struct ProblemConfig {
  ProblemKind kind = ProblemKind::Uniform;
  std::size_t J = 0;
  std::size_t K = 0;
  std::size_t T = 0;  // observations for ppca, panel length for matrix_completion, else 0
  std::vector<Kind> kinds;

  // data: a CSV path, or synthetic generation when empty
  std::string data_path;
  std::vector<std::string> covariate_paths;
  std::string missing_token = "NA";

  // synthetic generation
  std::vector<double> lambda;  // empty: generator default
  double sigma = 0.0;          // 0: generator default
  double mu = -1.0;
  std::size_t covariates = 1;
  double beta = 1.0;
  double missing_fraction = 0.1;

  // model hyperparameters
  bool with_mean = false;
  bool ordered_lambda = true;
  double eta = 0.1;

  /// "uniform:J=10:K=3:T=0"; unique within a config and used for seeding.
  std::string label() const;
};

struct BenchConfig {
  std::vector<ProblemConfig> problems;
  std::size_t runs = 8;
  std::uint64_t base_seed = 1;
  SamplerConfig sampler;
  Foi foi = Foi::All;
  bool regenerate_data = false;
  std::string output = "records.csv";
  std::size_t workers = 0;  // 0: OpenMP default

  /// Number of runs the grid will produce.
  std::size_t total_runs() const;
};

/// Throws ConfigError naming the offending key.
BenchConfig parse_config(std::string_view json_text);
BenchConfig load_config(const std::string& path);

/// Markdown description of every key and its default.
std::string config_reference();

}  // namespace stiefel::bench
