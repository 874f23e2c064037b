#include "fplab/io.hpp"

#include "fplab/error.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace fplab {

namespace {

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#ff7f0e", "#17becf"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v, bool log_axis) {
  char buf[32];
  if (log_axis) {
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", v);
  }
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

}  // namespace

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DomainError("CSV has no column '" + name + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = fields;
      table.columns.resize(fields.size());
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DomainError("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      table.columns[i].push_back(fields[i].empty() ? std::numeric_limits<double>::quiet_NaN()
                                                   : std::stod(fields[i]));
    }
  }
  if (!have_header) throw DomainError("CSV has no header");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  return read_csv(in);
}

void write_svg_plot(const CsvTable& table, const PlotOptions& options, std::ostream& out) {
  const auto& xs = table.column(options.x_column);
  Axis ax{0, 1, options.log_x};
  Axis ay{0, 1, options.log_y};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double x_lo = kInf, x_hi = -kInf, y_lo = kInf, y_hi = -kInf;
  for (const auto& name : options.y_columns) {
    const auto& ys = table.column(name);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!ax.usable(xs[i]) || !ay.usable(ys[i])) continue;
      x_lo = std::min(x_lo, ax.transform(xs[i]));
      x_hi = std::max(x_hi, ax.transform(xs[i]));
      y_lo = std::min(y_lo, ay.transform(ys[i]));
      y_hi = std::max(y_hi, ay.transform(ys[i]));
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = y_lo = 0.0;
    x_hi = y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  ax.lo = x_lo;
  ax.hi = x_hi;
  ay.lo = y_lo;
  ay.hi = y_hi;

  const double left = 80, right = 150, top = 40, bottom = 50;
  const double pw = options.width - left - right;
  const double ph = options.height - top - bottom;
  auto px = [&](double v) { return left + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return top + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  char buf[128];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << escape_xml(options.title)
      << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\"", left,
                top, pw, ph);
  out << buf << " fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
    const double fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double sx = left + pw * i / 4.0;
    const double sy = top + ph - ph * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", sx,
                  top + ph + 18);
    out << buf << tick_label(fx, ax.log) << "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">", left - 6,
                  sy + 4);
    out << buf << tick_label(fy, ay.log) << "</text>\n";
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">",
                left + pw / 2, top + ph + 38);
  out << buf << escape_xml(options.x_column) << "</text>\n";

  for (std::size_t s = 0; s < options.y_columns.size(); ++s) {
    const auto& ys = table.column(options.y_columns[s]);
    const char* color = kColors[s % kColors.size()];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << points << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!ax.usable(xs[i]) || !ay.usable(ys[i])) {
        flush();
        continue;
      }
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(xs[i]), py(ys[i]));
      points += buf;
    }
    flush();
    const double ly = top + 16.0 + 18.0 * static_cast<double>(s);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n",
                  left + pw + 12, ly - 4, left + pw + 36, ly - 4, color);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\">", left + pw + 42, ly);
    out << buf << escape_xml(options.y_columns[s]) << "</text>\n";
  }
  out << "</svg>\n";
}

void plot_csv_file(const std::filesystem::path& csv, const std::filesystem::path& svg,
                   const PlotOptions& options) {
  const CsvTable table = read_csv(csv);
  std::ofstream out(svg);
  if (!out) throw NumericalError("cannot write " + svg.string());
  write_svg_plot(table, options, out);
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["parameters"] = parameters;
  j["output_paths"] = output_paths;
  j["git_describe"] = git_describe;
  j["seed"] = seed;
  j["wall_time_ms"] = wall_time_ms;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw NumericalError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

std::filesystem::path make_run_dir(const std::filesystem::path& out_dir,
                                   const std::string& subcommand) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  std::filesystem::create_directories(out_dir);
  const std::string base = subcommand + "-" + stamp;
  for (int n = 0;; ++n) {
    auto dir = out_dir / (n == 0 ? base : base + "-" + std::to_string(n));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

}  // namespace fplab
