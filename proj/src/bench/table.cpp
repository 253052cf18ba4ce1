#include "stiefel/bench/table.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "stiefel/bench/csv.hpp"
#include "stiefel/errors.hpp"

namespace stiefel::bench {

namespace {

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

Metric parse_metric(std::string_view name) {
  if (name == "per_iter") return Metric::PerIter;
  if (name == "per_sec") return Metric::PerSec;
  throw ConfigError("metric must be per_iter or per_sec, got '" + std::string(name) + "'");
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "text") return TableFormat::Text;
  if (name == "csv") return TableFormat::Csv;
  throw ConfigError("format must be text or csv, got '" + std::string(name) + "'");
}

std::vector<TableRow> summarize(const std::vector<RunRecord>& records, Metric metric) {
  using Group = std::tuple<std::string, std::size_t, std::size_t, std::size_t>;
  std::map<Group, TableRow> rows;
  std::map<Group, std::array<double, 4>> sums;
  for (const auto& r : records) {
    const Group g{r.problem, r.J, r.K, r.T};
    TableRow& row = rows[g];
    row.problem = r.problem;
    row.J = r.J;
    row.K = r.K;
    row.T = r.T;
    const double v = metric == Metric::PerIter ? r.min_ess_per_iter : r.min_ess_per_sec;
    if (r.failed || !std::isfinite(v)) continue;
    const auto k = static_cast<std::size_t>(r.kind);
    sums[g][k] += v;
    row.count[k] += 1;
  }
  std::vector<TableRow> out;
  for (auto& [g, row] : rows) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (row.count[k] == 0) continue;
      row.mean[k] = sums[g][k] / static_cast<double>(row.count[k]);
      if (!row.best || *row.mean[k] > *row.mean[static_cast<std::size_t>(*row.best)]) row.best = static_cast<Kind>(k);
    }
    out.push_back(row);
  }
  return out;
}

std::string emit_table(const std::vector<RunRecord>& records, Metric metric, TableFormat format) {
  if (records.empty()) throw PreconditionError("emit_table: no records");
  const std::vector<TableRow> rows = summarize(records, metric);
  std::ostringstream os;
  const char* metric_name = metric == Metric::PerIter ? "min_ess_per_iter" : "min_ess_per_sec";

  if (format == TableFormat::Csv) {
    std::map<std::string, std::size_t> ids;
    for (const auto& r : rows) ids.emplace(r.problem, 0);
    std::size_t next = 0;
    for (auto& [name, id] : ids) id = next++;
    os << "# metric = " << metric_name << '\n';
    for (const auto& [name, id] : ids) os << "# problem " << id << " = " << name << '\n';
    os << "# best = column index of the largest mean (0 polar, 1 householder, 2 cayley, 3 givens)\n";
    os << "problem,J,K,T,polar,householder,cayley,givens,best\n";
    for (const auto& r : rows) {
      os << ids[r.problem] << ',' << r.J << ',' << r.K << ',' << r.T;
      for (const auto& m : r.mean) os << ',' << (m ? format_double(*m) : "--");
      os << ',' << (r.best ? std::to_string(static_cast<int>(*r.best)) : "--") << '\n';
    }
    return os.str();
  }

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"problem", "J", "K", "T"});
  for (Kind k : kAllKinds) cells.back().emplace_back(kind_label(k));
  for (const auto& r : rows) {
    std::vector<std::string> line{r.problem, std::to_string(r.J), std::to_string(r.K), std::to_string(r.T)};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!r.mean[k]) {
        line.emplace_back("--");
        continue;
      }
      std::string s = short_number(*r.mean[k]);
      if (r.best && static_cast<std::size_t>(*r.best) == k) s += "*";
      line.push_back(s);
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  os << metric_name << " (mean over runs, * = best in row)\n";
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) os << "  ";
      os << pad(line[c], width[c], c > 0);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace stiefel::bench
