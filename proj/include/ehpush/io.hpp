#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ehpush/errors.hpp"
#include "ehpush/sweep.hpp"

namespace ehpush {

/// Shortest decimal form that round-trips the exact double. Locale-free.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double out = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw PreconditionError("bad number '" + s + "'");
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "axis,value,policy,eta_mean,eta_ci95,local,unicast,macro,pushes,fetches,wasted,"
    "reps,seed_base";

/// Writes the sweep table. `comments` (typically the resolved
/// configuration) is embedded first, one '#' line each, so the file is
/// self-describing; consumers skip '#' lines.
inline void emit_csv(const SweepResult& result, const std::string& path,
                     const std::vector<std::string>& comments = {}) {
  if (result.cells.empty()) throw PreconditionError("emit_csv of an empty result");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const std::string& line : comments) out << "# " << line << "\n";
  out << kCsvHeader << "\n";
  for (const CellResult& cell : result.cells) {
    out << axis_name(result.axis) << ',' << format_double(cell.value) << ','
        << policy_name(cell.policy) << ',' << format_double(cell.eta_mean) << ','
        << format_double(cell.eta_ci95) << ',' << format_double(cell.mean_local) << ','
        << format_double(cell.mean_unicast) << ',' << format_double(cell.mean_macro)
        << ',' << format_double(cell.mean_pushes) << ','
        << format_double(cell.mean_fetches) << ',' << format_double(cell.mean_wasted)
        << ',' << result.replications << ',' << result.seed_base << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (table.header.empty())
      table.header = fields;
    else
      table.rows.push_back(fields);
  }
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_csv(in);
}

namespace detail {

inline std::string svg_escape_comment(std::string s) {
  std::size_t pos;
  while ((pos = s.find("--")) != std::string::npos) s.replace(pos, 2, "- -");
  return s;
}

inline std::string svg_color(std::size_t i) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[i % 6];
}

}  // namespace detail

/// Standalone SVG line chart of eta against the axis: one polyline per
/// policy (markers only for a single point), labels and a legend. Needs
/// strictly ascending axis values and defined eta in every cell.
inline void emit_plot(const SweepResult& result, const std::string& path,
                      const std::vector<std::string>& comments = {}) {
  if (result.cells.empty()) throw PreconditionError("emit_plot of an empty result");
  std::vector<double> values;
  for (const CellResult& cell : result.cells) {
    if (!cell.eta_defined)
      throw PreconditionError("emit_plot with undefined eta cells");
    if (values.empty() || cell.value != values.back()) values.push_back(cell.value);
  }
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i - 1] >= values[i])
      throw PreconditionError("emit_plot needs strictly ascending axis values");

  std::vector<PolicyKind> policies;
  for (const CellResult& cell : result.cells)
    if (std::find(policies.begin(), policies.end(), cell.policy) == policies.end())
      policies.push_back(cell.policy);

  const double width = 640, height = 420;
  const double left = 70, right = 20, top = 20, bottom = 50;
  const double x0 = values.front(), x1 = values.back();
  double y1 = 0.0;
  for (const CellResult& cell : result.cells) y1 = std::max(y1, cell.eta_mean);
  y1 = y1 <= 0.0 ? 1.0 : y1 * 1.08;
  const auto sx = [&](double v) {
    if (x1 == x0) return left + (width - left - right) / 2;
    return left + (v - x0) / (x1 - x0) * (width - left - right);
  };
  const auto sy = [&](double e) {
    return height - bottom - e / y1 * (height - top - bottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  for (const std::string& line : comments)
    svg << "<!-- " << detail::svg_escape_comment(line) << " -->\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
      << width - right << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  // tick labels: ends of both axes
  svg << "<text x=\"" << sx(x0) << "\" y=\"" << height - bottom + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(x0)
      << "</text>\n";
  if (x1 != x0)
    svg << "<text x=\"" << sx(x1) << "\" y=\"" << height - bottom + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(x1)
        << "</text>\n";
  svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(0) + 4
      << "\" font-size=\"11\" text-anchor=\"end\">0</text>\n";
  svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(y1) + 4
      << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(y1)
      << "</text>\n";
  // axis titles
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">" << axis_name(result.axis)
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\">macro-served ratio</text>\n";

  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    const std::string color = detail::svg_color(pi);
    std::ostringstream points;
    std::size_t count = 0;
    for (double v : values) {
      const CellResult& cell = result.cell(v, policies[pi]);
      if (count) points << ' ';
      points << sx(cell.value) << ',' << sy(cell.eta_mean);
      ++count;
      svg << "<circle cx=\"" << sx(cell.value) << "\" cy=\"" << sy(cell.eta_mean)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (count >= 2)
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
          << " points=\"" << points.str() << "\"/>\n";
    // legend entry
    const double ly = top + 16 + 16 * static_cast<double>(pi);
    svg << "<line x1=\"" << width - right - 150 << "\" y1=\"" << ly << "\" x2=\""
        << width - right - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << width - right - 114 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << policy_name(policies[pi]) << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg.str();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace ehpush
