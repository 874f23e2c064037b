#pragma once

// Run artifacts: CSV tables, SVG line plots rendered from CSV, and the JSON
// run manifest.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fplab {

/// 17 significant digits, shortest round-trip safe form.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // empty fields read as NaN

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Throws DomainError when the column is missing.
  const std::vector<double>& column(const std::string& name) const;
};

/// Parses numeric CSV with a header row; `#` lines are skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

struct PlotOptions {
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 440;
};

/// One polyline per y column. On log axes, non-positive points break the line.
void write_svg_plot(const CsvTable& table, const PlotOptions& options, std::ostream& out);
void plot_csv_file(const std::filesystem::path& csv, const std::filesystem::path& svg,
                   const PlotOptions& options);

struct RunManifest {
  std::string subcommand;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::string> output_paths;
  std::string git_describe;
  std::uint64_t seed = 0;
  std::int64_t wall_time_ms = 0;

  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;
};

/// Creates out_dir/<subcommand>-<UTC timestamp>[-n] and returns it.
std::filesystem::path make_run_dir(const std::filesystem::path& out_dir,
                                   const std::string& subcommand);

}  // namespace fplab
