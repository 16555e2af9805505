// sea_sim: command-line front end for the SEA limb simulation.
//
// Exit codes: 0 success, 1 validation or simulation failure, 2 usage/config error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sea/sea.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (auto part : sea::detail::split(text, ',')) {
    double v = 0.0;
    if (!sea::detail::parse_double(part, v)) {
      throw sea::ParseError(what + ": bad number '" + std::string(sea::detail::trim(part)) + "'");
    }
    out.push_back(v);
  }
  return out;
}

Eigen::Matrix2d parse_matrix(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.size() != 4) throw sea::ParseError(what + ": expected 4 comma-separated numbers (row major)");
  Eigen::Matrix2d m;
  m << v[0], v[1], v[2], v[3];
  return m;
}

// Grid file: one `name = v1, v2, ...` line per swept parameter; '#' comments.
std::vector<sea::SweepAxis> read_grid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sea::FileNotFound(path.string());
  std::vector<sea::SweepAxis> axes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = sea::detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw sea::ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'name = values'");
    }
    sea::SweepAxis ax;
    ax.name = std::string(sea::detail::trim(view.substr(0, eq)));
    ax.values = parse_list(std::string(view.substr(eq + 1)), path.string() + ":" + std::to_string(lineno));
    axes.push_back(std::move(ax));
  }
  if (axes.empty()) throw sea::ParseError(path.string() + ": no sweep axes");
  return axes;
}

void print_metrics(const sea::Metrics& m) {
  const auto names = sea::Metrics::column_names();
  const auto vals = m.values();
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::cout << "  " << names[i] << " = " << sea::format_double(vals[i]) << "\n";
  }
}

void write_plots(const sea::SimTrace& trace, const fs::path& dir, bool ideal) {
  sea::emit_plot(trace, {"r", "x1", "x_m1"}, dir / "angle.svg", "Joint angle tracking [rad]");
  sea::emit_plot(trace, {"e1", "e2"}, dir / "errors.svg", "Tracking errors");
  if (ideal) {
    sea::emit_plot(trace, {"v_x"}, dir / "torque.svg", "Torque demand [N m]");
    sea::emit_plot(trace, {"V_x"}, dir / "clf.svg", "Lyapunov function");
  } else {
    sea::emit_plot(trace, {"z1", "v_x"}, dir / "torque.svg", "SEA torque [N m]");
  }
  sea::emit_plot(trace, {"K_x1", "K_x2", "K_r", "theta1", "theta2"}, dir / "gains.svg",
                 "Adaptive gains");
}

// Shared by `simulate` and `ideal`: run, then write trace, metrics, the
// effective config and plots into the output directory.
int run_single(const std::string& config_path, const std::string& out_override, sea::SimMode mode) {
  sea::RunConfig rc = sea::parse_config(config_path);
  rc.sim.mode = mode;
  if (!out_override.empty()) rc.output.dir = out_override;
  const fs::path dir = rc.output.dir;
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "effective_config.ini");
    cfg << sea::to_config_string(rc);
    if (!cfg) throw sea::IoError("cannot write " + (dir / "effective_config.ini").string());
  }

  const sea::Scenario sc = sea::to_scenario(rc);
  sea::SimTrace trace;
  try {
    trace = sea::run(sc);
  } catch (const sea::SimulationFault& fault) {
    sea::write_trace(fault.partial_trace(), dir / "trace.csv");
    std::cerr << "error: " << fault.what() << " (partial trace with " << fault.partial_trace().size()
              << " records written)\n";
    return kFailure;
  }
  const sea::Metrics m = sea::metrics(trace, sc.sim.transient_cutoff);
  sea::write_trace(trace, dir / "trace.csv");
  sea::write_metrics(m, dir / "metrics.csv");
  if (rc.output.plots) write_plots(trace, dir, mode == sea::SimMode::ideal_mrac);

  std::cout << (mode == sea::SimMode::ideal_mrac ? "ideal-MRAC" : "full-cascade") << " run, "
            << trace.size() << " records -> " << dir.string() << "\n";
  print_metrics(m);
  if (mode == sea::SimMode::ideal_mrac) {
    std::cout << "  max V_x increase per step = " << sea::format_double(sea::max_clf_increase(trace)) << "\n";
  }
  return kOk;
}

int run_sweep_cmd(const std::string& config_path, const std::string& grid_path, unsigned threads,
                  const std::string& out_override) {
  sea::RunConfig rc = sea::parse_config(config_path);
  if (!out_override.empty()) rc.output.dir = out_override;
  const auto axes = read_grid(grid_path);
  const sea::Scenario sc = sea::to_scenario(rc);
  const sea::SweepTable table = sea::run_sweep(sc, axes, threads);
  const fs::path dir = rc.output.dir;
  sea::write_metrics(table, dir / "sweep.csv");
  sea::write_metrics(table, std::cout);
  return kOk;
}

int run_lyapunov_cmd(const std::string& am, const std::string& q) {
  const Eigen::Matrix2d A = parse_matrix(am, "--am");
  const Eigen::Matrix2d Q = q.empty() ? Eigen::Matrix2d::Identity() : parse_matrix(q, "--q");
  const Eigen::Matrix2d P = sea::solve_lyapunov(A, Q);
  std::cout << "P = [" << sea::format_double(P(0, 0)) << ", " << sea::format_double(P(0, 1)) << "; "
            << sea::format_double(P(1, 0)) << ", " << sea::format_double(P(1, 1)) << "]\n"
            << "residual = " << sea::format_double(sea::lyapunov_residual(A, Q, P)) << "\n"
            << "P positive definite = " << (sea::is_spd(P) ? "true" : "false") << "\n";
  return kOk;
}

int run_validate_cmd(const std::string& config_path) {
  const sea::RunConfig rc = config_path.empty() ? sea::default_config() : sea::parse_config(config_path);
  const auto results = sea::run_invariant_suite(sea::to_scenario(rc));
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SEA limb simulation: adaptive control cascaded through back-stepping"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "full-cascade run; writes trace, metrics, config echo, plots");
  simulate->add_option("config", config_path, "config file")->required();
  simulate->add_option("--out", out_dir, "output directory (overrides [output] dir)");

  auto* ideal = app.add_subcommand("ideal", "ideal-MRAC run with Lyapunov diagnostics");
  ideal->add_option("config", config_path, "config file")->required();
  ideal->add_option("--out", out_dir, "output directory (overrides [output] dir)");

  std::string grid_path;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "metrics table over a parameter grid");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("grid", grid_path, "grid file, lines of 'name = v1, v2, ...'")->required();
  sweep->add_option("--threads", threads, "worker threads (1 = serial)")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "output directory (overrides [output] dir)");

  std::string am;
  std::string q;
  auto* lyap = app.add_subcommand("lyapunov", "solve P A + A^T P = -Q");
  lyap->add_option("--am", am, "A_m row major: a11,a12,a21,a22")->required();
  lyap->add_option("--q", q, "Q row major (default identity)");

  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  validate->add_option("config", config_path, "optional config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_single(config_path, out_dir, sea::SimMode::full_cascade);
    if (*ideal) return run_single(config_path, out_dir, sea::SimMode::ideal_mrac);
    if (*sweep) return run_sweep_cmd(config_path, grid_path, threads, out_dir);
    if (*lyap) return run_lyapunov_cmd(am, q);
    if (*validate) return run_validate_cmd(config_path);
  } catch (const sea::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
