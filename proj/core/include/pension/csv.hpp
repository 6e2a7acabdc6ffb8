#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace pension {

/// Shortest decimal string that parses back to exactly `x`. Non-finite
/// values print as inf, -inf or nan.
std::string format_double(double x);

/// Comma-separated writer with a mandatory header row. Cells containing a
/// comma, quote or newline are quoted.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(unsigned long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::size_t value) { return cell(static_cast<unsigned long long>(value)); }
  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(const char* text) { return cell(std::string_view(text)); }
  /// Ends the current row; throws if its width differs from the header.
  void end_row();

  std::size_t rows() const { return rows_; }
  void close();

 private:
  void separator();

  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t width_;
  std::size_t column_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace pension
