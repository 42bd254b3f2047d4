#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmrf {

/// Locale-independent text with 17 significant digits (round-trips exactly).
std::string format_double(double x);

/// Minimal CSV table: header plus rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_numeric_row(std::span<const double> values);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string read_text(const std::filesystem::path& path);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// 64-bit FNV-1a rendered as 16 lowercase hex digits.
std::string digest_hex(std::span<const std::uint8_t> bytes);
std::string digest_hex(std::string_view text);
std::string file_digest(const std::filesystem::path& path);

/// Simple polyline chart, one series per entry. Axis labels are free text.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_chart(std::string_view title, std::string_view x_label, std::string_view y_label,
                           std::span<const SvgSeries> series, bool log_y = false);

}  // namespace gmrf
