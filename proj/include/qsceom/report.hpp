#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qsceom {

/// Column-named table of pre-formatted cells; the unit of CSV output.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;
  const std::string& cell(std::size_t row, const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Shortest round-trip decimal form, so rereading a CSV gives the same double.
std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(unsigned long long v) { return std::to_string(v); }
inline std::string fmt(unsigned long v) { return std::to_string(v); }

/// "# config_hash=<hash>" line, header row, data rows.
void write_csv(const std::filesystem::path& path, const Table& table, const std::string& config_hash);
/// Reads a file written by write_csv; '#' lines are skipped.
Table read_csv(const std::filesystem::path& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
  bool dashed = false;
  bool markers = true;
  bool line = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<std::pair<double, std::string>> hlines;  // horizontal reference lines
};

/// Standalone SVG line chart.
std::string render_svg(const PlotSpec& spec);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace qsceom
