#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pqsched::csv {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double value);

/// Header-addressed table read from a comma-separated file. Row i of the
/// table sits on line i + 2 of the file.
class Table {
 public:
  static Table parse(std::istream& in, const std::string& source_name = "<input>");
  static Table read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return cells_.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }
  std::size_t line_of(std::size_t row) const { return lines_[row]; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
  std::vector<std::size_t> lines_;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& header(std::initializer_list<std::string_view> names);
  Writer& header(const std::vector<std::string>& names);
  Writer& field(std::string_view text);
  Writer& field(double value);
  Writer& field(long long value);
  Writer& field(unsigned long long value);
  Writer& field(int value) { return field(static_cast<long long>(value)); }
  Writer& field(std::size_t value) { return field(static_cast<unsigned long long>(value)); }
  Writer& empty();
  void end_row();

 private:
  void separator();
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace pqsched::csv
