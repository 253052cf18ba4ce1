#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stiefel/bench/experiment.hpp"

namespace stiefel::bench {

enum class Metric { PerIter, PerSec };
enum class TableFormat { Text, Csv };

Metric parse_metric(std::string_view name);  // "per_iter" | "per_sec"
TableFormat parse_table_format(std::string_view name);  // "text" | "csv"

struct TableRow {
  std::string problem;
  std::size_t J = 0;
  std::size_t K = 0;
  std::size_t T = 0;
  std::array<std::optional<double>, 4> mean;  // by Kind; empty when no successful run
  std::array<std::size_t, 4> count{};         // successful runs averaged
  std::optional<Kind> best;
};

/// One row per (problem, J, K, T), cell = mean of the metric over the
/// successful runs of that kind.
std::vector<TableRow> summarize(const std::vector<RunRecord>& records, Metric metric);

/// Aligned text with the best cell of each row marked '*', or CSV whose
/// problem column is an index explained by '# problem i = name' comments
/// and whose missing cells read "--".
std::string emit_table(const std::vector<RunRecord>& records, Metric metric, TableFormat format);

}  // namespace stiefel::bench
