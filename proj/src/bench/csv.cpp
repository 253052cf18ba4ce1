#include "stiefel/bench/csv.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stiefel/errors.hpp"

namespace stiefel::bench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

bool CsvMatrix::any_missing() const {
  for (bool m : missing)
    if (m) return true;
  return false;
}

CsvMatrix parse_csv_matrix(std::string_view text, std::string_view missing_token) {
  CsvMatrix out;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const auto cells = split_commas(line);
    if (first) {
      first = false;
      cols = cells.size();
      bool numeric = true;
      double tmp = 0.0;
      for (auto c : cells)
        if (c != missing_token && !parse_number(c, tmp)) numeric = false;
      if (!numeric) {
        for (auto c : cells) out.header.emplace_back(c);
        continue;
      }
    }
    if (cells.size() != cols) {
      throw IoError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " cells, found " +
                    std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0.0;
      if (cells[j] == missing_token) {
        out.missing.push_back(true);
      } else if (parse_number(cells[j], v)) {
        out.missing.push_back(false);
      } else {
        throw IoError("csv line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) +
                      ": not a number: '" + std::string(cells[j]) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  out.values = Matrix(rows, rows == 0 ? 0 : cols, std::move(values));
  return out;
}

CsvMatrix load_csv_matrix(const std::string& path, std::string_view missing_token) {
  return parse_csv_matrix(read_text_file(path), missing_token);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_csv_matrix(const Matrix& m, const std::vector<bool>& missing, std::string_view missing_token,
                              const std::vector<std::string>& header) {
  if (!missing.empty() && missing.size() != m.size()) throw PreconditionError("format_csv_matrix: mask size mismatch");
  std::ostringstream os;
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  if (!header.empty()) os << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      if (!missing.empty() && missing[i * m.cols() + j]) {
        os << missing_token;
      } else {
        os << format_double(m(i, j));
      }
    }
    os << '\n';
  }
  return os.str();
}

void save_csv_matrix(const std::string& path, const Matrix& m, const std::vector<bool>& missing,
                     std::string_view missing_token, const std::vector<std::string>& header) {
  write_text_file(path, format_csv_matrix(m, missing, missing_token, header));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return os.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw IoError("error writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace stiefel::bench
