#include "pension/csv.hpp"

#include <charconv>
#include <cmath>

#include "pension/errors.hpp"

namespace pension {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

std::string csv_escape(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), width_(header.size()) {
  if (header.empty()) throw ArgumentError("CSV header must not be empty");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out_ << ',';
    out_ << csv_escape(header[c]);
  }
  out_ << '\n';
}

void CsvWriter::separator() {
  if (column_ >= width_) throw ArgumentError("CSV row wider than header in " + path_.string());
  if (column_++) out_ << ',';
}

CsvWriter& CsvWriter::cell(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::cell(unsigned long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  separator();
  out_ << csv_escape(text);
  return *this;
}

void CsvWriter::end_row() {
  if (column_ != width_) throw ArgumentError("CSV row narrower than header in " + path_.string());
  out_ << '\n';
  column_ = 0;
  ++rows_;
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("failed writing " + path_.string());
}

}  // namespace pension
