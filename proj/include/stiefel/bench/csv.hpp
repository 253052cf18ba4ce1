#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stiefel/matrix.hpp"

namespace stiefel::bench {

struct CsvMatrix {
  Matrix values;               // missing cells hold 0
  std::vector<bool> missing;   // row-major, true where the cell held the missing token
  std::vector<std::string> header;  // empty when the first row was numeric

  bool any_missing() const;
};

/// Parse comma-separated numbers. Lines starting with '#' and blank lines are
/// skipped. A first row with a non-numeric cell (other than the missing
/// token) is taken as a header. Throws IoError with the line number on
/// ragged rows or stray text.
CsvMatrix parse_csv_matrix(std::string_view text, std::string_view missing_token = "NA");
CsvMatrix load_csv_matrix(const std::string& path, std::string_view missing_token = "NA");

/// Write a matrix, optionally with a header line and missing cells.
std::string format_csv_matrix(const Matrix& m, const std::vector<bool>& missing = {},
                              std::string_view missing_token = "NA", const std::vector<std::string>& header = {});
void save_csv_matrix(const std::string& path, const Matrix& m, const std::vector<bool>& missing = {},
                     std::string_view missing_token = "NA", const std::vector<std::string>& header = {});

/// Shortest text that reads back to the same double.
std::string format_double(double x);

std::string read_text_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace stiefel::bench
