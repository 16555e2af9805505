#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sea/errors.hpp"

namespace sea {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Whole-token double parse; false on trailing garbage.
inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

struct ReferenceTrajectory {
  enum class Kind { parametric_walk, csv, constant, step, sine };

  Kind kind = Kind::parametric_walk;
  // parametric_walk: amplitude sin(2 pi t / period) + amplitude2 sin(4 pi t / period + phase2)
  // sine:            offset + amplitude sin(2 pi t / period + phase)
  double amplitude = 0.25;
  double amplitude2 = 0.10;
  double period = 2.0;
  double phase = 0.0;
  double phase2 = 0.6;
  double offset = 0.0;
  double value = 0.2;  // constant / step level
  double step_time = 0.0;
  std::string file;
  std::vector<std::pair<double, double>> samples;  // csv kind, loaded

  friend bool operator==(const ReferenceTrajectory&, const ReferenceTrajectory&) = default;
};

// Two comma-separated columns (t_seconds, angle_radians). A first line that
// does not parse as numbers is taken as a header. Times must increase strictly.
inline std::vector<std::pair<double, double>> load_reference_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    double t = 0.0;
    double a = 0.0;
    const bool ok = comma != std::string_view::npos &&
                    detail::parse_double(view.substr(0, comma), t) &&
                    detail::parse_double(view.substr(comma + 1), a);
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw BadCsv(path.string() + ":" + std::to_string(lineno) + ": expected 't,angle'");
    }
    if (!std::isfinite(t) || !std::isfinite(a)) {
      throw BadCsv(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
    }
    if (!rows.empty() && !(t > rows.back().first)) {
      throw BadCsv(path.string() + ":" + std::to_string(lineno) + ": time must increase strictly");
    }
    rows.emplace_back(t, a);
  }
  if (rows.size() < 2) throw BadCsv(path.string() + ": need at least two samples");
  return rows;
}

/// Linear interpolation, holding the end values outside the sampled span.
inline double interpolate_samples(const std::vector<std::pair<double, double>>& s, double t) {
  if (s.empty()) throw BadCsv("reference has no samples");
  if (t <= s.front().first) return s.front().second;
  if (t >= s.back().first) return s.back().second;
  auto hi = std::upper_bound(s.begin(), s.end(), t,
                             [](double v, const auto& p) { return v < p.first; });
  auto lo = std::prev(hi);
  const double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

inline double reference_waveform(const ReferenceTrajectory& ref, double t) {
  using std::numbers::pi;
  switch (ref.kind) {
    case ReferenceTrajectory::Kind::parametric_walk:
      return ref.amplitude * std::sin(2.0 * pi * t / ref.period) +
             ref.amplitude2 * std::sin(4.0 * pi * t / ref.period + ref.phase2);
    case ReferenceTrajectory::Kind::sine:
      return ref.offset + ref.amplitude * std::sin(2.0 * pi * t / ref.period + ref.phase);
    case ReferenceTrajectory::Kind::constant:
      return ref.value;
    case ReferenceTrajectory::Kind::step:
      return t >= ref.step_time ? ref.value : 0.0;
    case ReferenceTrajectory::Kind::csv:
      return interpolate_samples(ref.samples, t);
  }
  return 0.0;
}

}  // namespace sea
