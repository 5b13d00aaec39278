// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pld::cli {

/// Shortest round-trip decimal form of v ('.' decimal point, no locale).
std::string format_number(double v);

/// Accumulates a CSV table in memory: ',' separators, LF line endings and a
/// header row that is always present.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row();
  CsvTable& add(double v);
  CsvTable& add(std::size_t v);
  CsvTable& add(std::string_view text);
  CsvTable& add_empty();

  std::size_t rows() const { return rows_; }
  /// Throws if a row has a different number of cells than the header.
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
  std::size_t rows_ = 0;
};

/// Output files of one experiment, keyed by file name (ordered).
using FileSet = std::map<std::string, std::string>;

/// Writes `content` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Parses a CSV with a header row and one numeric column (the first).
std::vector<double> read_single_column_csv(const std::filesystem::path& path);

}  // namespace pld::cli
