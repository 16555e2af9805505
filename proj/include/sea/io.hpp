#pragma once

// CSV trace / metrics serialization and a dependency-free SVG line chart.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sea/errors.hpp"
#include "sea/reference.hpp"
#include "sea/simulation.hpp"

namespace sea {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw IoError("cannot format double");
  return {buf.data(), ptr};
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Header row with TraceRecord::column_names(), one row per control tick.
inline void write_trace(const SimTrace& trace, std::ostream& out) {
  const auto names = TraceRecord::column_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (const auto& rec : trace.records) {
    const auto vals = rec.values();
    for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << format_double(vals[i]);
    out << '\n';
  }
}

inline void write_trace(const SimTrace& trace, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  write_trace(trace, out);
  detail::finish(out, path);
}

inline SimTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path.string());
  std::string line;
  if (!std::getline(in, line)) throw BadCsv(path.string() + ": missing header");
  const auto names = TraceRecord::column_names();
  const auto header = detail::split(detail::trim(line), ',');
  if (header.size() != names.size() || !std::equal(header.begin(), header.end(), names.begin())) {
    throw BadCsv(path.string() + ": unexpected header");
  }
  SimTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(detail::trim(line), ',');
    if (cells.size() != names.size()) {
      throw BadCsv(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    std::array<double, TraceRecord::kColumns> vals{};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!detail::parse_double(cells[i], vals[i])) {
        throw BadCsv(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                     std::string(cells[i]) + "'");
      }
    }
    trace.records.push_back(TraceRecord::from_values(vals));
  }
  return trace;
}

// Sweep table: index, one column per swept parameter, status, then metrics.
// An empty table is just its header.
inline void write_metrics(const SweepTable& table, std::ostream& out) {
  out << "index";
  for (const auto& n : table.param_names) out << ',' << n;
  out << ",status";
  for (const auto& n : Metrics::column_names()) out << ',' << n;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.index;
    for (double p : row.params) out << ',' << format_double(p);
    std::string status = row.status;
    std::replace_if(status.begin(), status.end(), [](char c) { return c == ',' || c == '\n'; }, ';');
    out << ',' << status;
    for (double v : row.metrics.values()) out << ',' << format_double(v);
    out << '\n';
  }
}

inline void write_metrics(const SweepTable& table, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  write_metrics(table, out);
  detail::finish(out, path);
}

/// Single-run metrics as a one-row table without parameter columns.
inline void write_metrics(const Metrics& m, const std::filesystem::path& path) {
  SweepTable t;
  t.rows.push_back({0, {}, "ok", m});
  write_metrics(t, path);
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
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

inline std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << (std::abs(v) < 1e-12 ? 0.0 : v);
  return os.str();
}

}  // namespace detail

// Standalone SVG line chart of trace columns against t.
inline void emit_plot(const SimTrace& trace, const std::vector<std::string>& columns,
                      const std::filesystem::path& path, std::string_view title = "") {
  if (trace.empty()) throw ValidationError("cannot plot an empty trace");
  if (columns.empty()) throw ValidationError("no columns to plot");
  std::vector<std::vector<double>> series;
  for (const auto& c : columns) series.push_back(trace.column(c));
  const std::vector<double> t = trace.column("t");

  constexpr double W = 900, H = 420, left = 70, right = 160, top = 40, bottom = 50;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  const double t0 = t.front();
  const double t1 = t.back() > t0 ? t.back() : t0 + 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : s) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto sx = [&](double v) { return left + (v - t0) / (t1 - t0) * pw; };
  auto sy = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

  static constexpr std::array<const char*, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                         "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  static constexpr std::array<const char*, 3> dashes = {"", "8,4", "2,3"};

  auto out = detail::open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << detail::xml_escape(title) << "</text>\n";
  }
  out << "<g stroke=\"#ddd\" stroke-width=\"1\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double x = left + pw * i / 5.0;
    const double y = top + ph * i / 5.0;
    out << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph << "\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y << "\"/>\n";
  }
  out << "</g>\n<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
      << "</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double tv = t0 + (t1 - t0) * i / 5.0;
    const double yv = hi - (hi - lo) * i / 5.0;
    out << "<text x=\"" << sx(tv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << detail::tick_label(tv) << "</text>\n"
        << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << detail::tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">t [s]</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % palette.size()];
    const char* dash = dashes[(s / palette.size() + s) % dashes.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (*dash) out << " stroke-dasharray=\"" << dash << '"';
    out << " points=\"";
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!std::isfinite(series[s][i])) continue;
      out << sx(t[i]) << ',' << sy(series[s][i]) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 45
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (*dash) out << " stroke-dasharray=\"" << dash << '"';
    out << "/>\n<text x=\"" << left + pw + 52 << "\" y=\"" << ly + 4 << "\">"
        << detail::xml_escape(columns[s]) << "</text>\n";
  }
  out << "</svg>\n";
  detail::finish(out, path);
}

}  // namespace sea
