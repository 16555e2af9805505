#pragma once

// Fixed-step closed-loop simulation. The controller runs at dt_control with
// its output held while the plant advances in RK4 substeps of dt_physics.

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "sea/controller.hpp"
#include "sea/errors.hpp"
#include "sea/integrator.hpp"
#include "sea/lyapunov.hpp"
#include "sea/plant.hpp"
#include "sea/reference.hpp"

namespace sea {

enum class SimMode { full_cascade, ideal_mrac };
enum class AdaptationIntegrator { euler, rk4 };

struct SimConfig {
  double dt_physics = 1e-4;
  double dt_control = 0.01;
  double duration = 20.0;
  PlantState initial{0.2, 0.0, 0.0, 0.0};
  Eigen::Vector2d reference_initial = Eigen::Vector2d::Zero();
  SimMode mode = SimMode::full_cascade;
  double transient_cutoff = 2.0;

  /// Physics substeps per control tick. Assumes validate() passed.
  int substeps() const { return static_cast<int>(std::llround(dt_control / dt_physics)); }
  /// Control ticks after t = 0; the trace holds ticks() + 1 records.
  long ticks() const { return static_cast<long>(std::floor(duration / dt_control + 1e-9)); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate(const SimConfig& c) {
  if (!(c.dt_physics > 0.0)) throw ValidationError("dt_physics must be > 0");
  if (!(c.dt_control > 0.0)) throw ValidationError("dt_control must be > 0");
  if (!(c.duration > 0.0)) throw ValidationError("duration must be > 0");
  const double ratio = c.dt_control / c.dt_physics;
  if (ratio < 0.5 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ValidationError("dt_control must be an integer multiple of dt_physics (ratio " +
                          std::to_string(ratio) + ")");
  }
  if (!(c.transient_cutoff >= 0.0)) throw ValidationError("transient_cutoff must be >= 0");
}

struct ControllerSettings {
  Eigen::Matrix2d A_m = (Eigen::Matrix2d() << 0.0, 1.0, -6.0, -4.0).finished();
  Eigen::Vector2d B_m = Eigen::Vector2d(0.0, 6.0);
  AdaptationConfig adaptation;  // P and Lambda are filled by finalize()
  bool use_printed_P = false;
  double derivative_tau = 0.1;  // s
  bool drift_without_zeta = false;
  AdaptationIntegrator integrator = AdaptationIntegrator::euler;
  bool freeze_gains = false;
  AdaptiveGains initial_gains;

  friend bool operator==(const ControllerSettings&, const ControllerSettings&) = default;
};

/// The P printed alongside the section 4 reference model.
inline Eigen::Matrix2d printed_P() {
  return (Eigen::Matrix2d() << 3.0 / 8.0, 1.0 / 4.0, 1.0 / 4.0, 3.0 / 16.0).finished();
}

/// Everything a run needs, fully resolved.
struct Scenario {
  PlantParams plant;  // true plant
  PlantParams model;  // what the controller believes
  ControllerSettings controller;
  ReferenceTrajectory reference;
  DisturbanceProfile disturbance;
  SimConfig sim;

  // Fills Lambda from the model and P from the Lyapunov equation (or the
  // printed P when use_printed_P is set).
  void finalize() {
    controller.adaptation.Lambda = model.lambda();
    controller.adaptation.P = controller.use_printed_P
                                  ? printed_P()
                                  : solve_lyapunov(controller.A_m, controller.adaptation.Q);
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct TraceRecord {
  double t = 0.0;
  double r = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double x_m1 = 0.0;
  double x_m2 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double v_x = 0.0;
  double v_1 = 0.0;
  double u_eq = 0.0;
  double K_x1 = 0.0;
  double K_x2 = 0.0;
  double K_r = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double tau_D = 0.0;
  double V_x = 0.0;
  double v_in = 0.0;

  static constexpr std::size_t kColumns = 21;
  static constexpr std::array<std::string_view, kColumns> column_names() {
    return {"t",    "r",    "x1",   "x2",     "x_m1",   "x_m2",  "e1",
            "e2",   "z1",   "z2",   "v_x",    "v_1",    "u_eq",  "K_x1",
            "K_x2", "K_r",  "theta1", "theta2", "tau_D", "V_x",  "v_in"};
  }
  std::array<double, kColumns> values() const {
    return {t,    r,    x1,   x2,     x_m1,   x_m2,  e1,  e2,  z1,  z2,  v_x,
            v_1,  u_eq, K_x1, K_x2,   K_r,    theta1, theta2, tau_D, V_x, v_in};
  }
  static TraceRecord from_values(const std::array<double, kColumns>& v) {
    return {v[0],  v[1],  v[2],  v[3],  v[4],  v[5],  v[6],  v[7],  v[8],  v[9], v[10],
            v[11], v[12], v[13], v[14], v[15], v[16], v[17], v[18], v[19], v[20]};
  }
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SimTrace {
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }

  /// Index of a column name, or throws UnknownColumn.
  static std::size_t column_index(std::string_view name) {
    const auto names = TraceRecord::column_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    throw UnknownColumn(std::string(name));
  }
  std::vector<double> column(std::string_view name) const {
    const std::size_t idx = column_index(name);
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(rec.values()[idx]);
    return out;
  }
  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

enum class FaultKind { geometry, non_finite };

// Raised when a run cannot continue; carries the records produced so far.
class SimulationFault : public Error {
 public:
  SimulationFault(FaultKind kind, const std::string& what, SimTrace partial)
      : Error(std::string(kind == FaultKind::geometry ? "GeometryFault: " : "NonFiniteState: ") +
              what),
        kind_(kind),
        partial_(std::move(partial)) {}

  FaultKind kind() const { return kind_; }
  const SimTrace& partial_trace() const { return partial_; }

 private:
  FaultKind kind_;
  SimTrace partial_;
};

namespace detail {

/// Ideal gains of the controller model, with Theta evaluated at tau_D.
inline AdaptiveGains ideal_adaptive_gains(const Scenario& sc, double tau_D) {
  const ControllerSettings& c = sc.controller;
  const IdealGains ig = ideal_gains(limb_drift_matrix(sc.model), c.adaptation.B,
                                    c.adaptation.Lambda, c.A_m, c.B_m);
  return {ig.K_x, ig.K_r, true_theta(sc.model, tau_D)};
}

template <typename Body>
void run_guarded(SimTrace& trace, Body&& body) {
  try {
    body();
  } catch (const InfeasibleGeometry& e) {
    throw SimulationFault(FaultKind::geometry, e.what(), std::move(trace));
  } catch (const DegenerateAngle& e) {
    throw SimulationFault(FaultKind::geometry, e.what(), std::move(trace));
  } catch (const NonFiniteDerivative& e) {
    throw SimulationFault(FaultKind::non_finite, e.what(), std::move(trace));
  }
}

}  // namespace detail

// Ideal-mode system: v_x drives the limb directly as a torque source and the
// adaptation laws are integrated together with the plant.
//   y = [x1, x2, x_m1, x_m2, K_x1, K_x2, K_r, theta1, theta2]
class IdealMracSystem {
 public:
  using State = Eigen::Matrix<double, 9, 1>;

  explicit IdealMracSystem(const Scenario& sc) : sc_(sc) {}

  State derivative(double t, const State& y, double r) const {
    const ControllerSettings& c = sc_.controller;
    const Eigen::Vector2d X = y.segment<2>(0);
    const Eigen::Vector2d X_m = y.segment<2>(2);
    const AdaptiveGains g = AdaptiveGains::unpack(y.segment<5>(4));
    const double v_x = control_vx(g, X, r);
    const Eigen::Vector2d dX = limb_rhs({X[0], X[1], v_x, 0.0}, sc_.disturbance(t), sc_.plant);
    State dy;
    dy.segment<2>(0) = dX;
    dy.segment<2>(2) = c.A_m * X_m + c.B_m * r;
    if (c.freeze_gains) {
      dy.segment<5>(4).setZero();
    } else {
      dy.segment<5>(4) = adaptation_rates(X - X_m, X, r, regressor(X), c.adaptation).pack();
    }
    return dy;
  }

  State advance(const State& y, double t, double r, double h, int steps) const {
    State out = y;
    auto rhs = [&](double ts, const State& ys) -> State { return derivative(ts, ys, r); };
    for (int i = 0; i < steps; ++i) out = rk4_step(rhs, out, t + i * h, h);
    return out;
  }

  double clf(const State& y, double t) const {
    const Eigen::Vector2d e = y.segment<2>(0) - y.segment<2>(2);
    return clf_value(e, AdaptiveGains::unpack(y.segment<5>(4)),
                     detail::ideal_adaptive_gains(sc_, sc_.disturbance(t)), sc_.controller.adaptation);
  }

  State initial_state() const {
    State y;
    y << sc_.sim.initial.x1, sc_.sim.initial.x2, sc_.sim.reference_initial,
        sc_.controller.initial_gains.pack();
    return y;
  }

 private:
  const Scenario& sc_;
};

inline SimTrace run_ideal_mrac(const Scenario& sc) {
  validate(sc.sim);
  const SimConfig& cfg = sc.sim;
  const IdealMracSystem sys(sc);
  const int sub = cfg.substeps();
  const double h = cfg.dt_control / sub;
  const long n = cfg.ticks();

  SimTrace trace;
  trace.records.reserve(static_cast<std::size_t>(n) + 1);
  IdealMracSystem::State y = sys.initial_state();
  detail::run_guarded(trace, [&] {
    for (long k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) * cfg.dt_control;
      const double r = reference_waveform(sc.reference, t);
      const Eigen::Vector2d X = y.segment<2>(0);
      const Eigen::Vector2d X_m = y.segment<2>(2);
      const AdaptiveGains g = AdaptiveGains::unpack(y.segment<5>(4));
      const double v_x = control_vx(g, X, r);

      TraceRecord rec;
      rec.t = t;
      rec.r = r;
      rec.x1 = X[0];
      rec.x2 = X[1];
      rec.x_m1 = X_m[0];
      rec.x_m2 = X_m[1];
      rec.e1 = X[0] - X_m[0];
      rec.e2 = X[1] - X_m[1];
      rec.z1 = v_x;
      rec.v_x = v_x;
      rec.K_x1 = g.K_x[0];
      rec.K_x2 = g.K_x[1];
      rec.K_r = g.K_r;
      rec.theta1 = g.theta[0];
      rec.theta2 = g.theta[1];
      rec.tau_D = sc.disturbance(t);
      rec.V_x = sys.clf(y, t);
      trace.records.push_back(rec);
      if (k == n) break;

      y = sys.advance(y, t, r, h, sub);
      if (!y.allFinite()) throw NonFiniteDerivative("state left the finite range at t=" + std::to_string(t));
    }
  });
  return trace;
}

// Full cascade: MRAC torque demand -> back-stepping -> SEA virtual control.
//   y = [x1, x2, z1, z2, x_m1, x_m2, K_x1, K_x2, K_r, theta1, theta2]
inline SimTrace run_closed_loop(const Scenario& sc) {
  validate(sc.sim);
  const SimConfig& cfg = sc.sim;
  const ControllerSettings& c = sc.controller;
  using State = Eigen::Matrix<double, 11, 1>;
  const bool co_integrate = c.integrator == AdaptationIntegrator::rk4 && !c.freeze_gains;
  const bool euler = c.integrator == AdaptationIntegrator::euler && !c.freeze_gains;

  CascadeController controller(c.adaptation, sc.model, cfg.dt_control, c.derivative_tau,
                               c.drift_without_zeta, c.initial_gains);
  const int sub = cfg.substeps();
  const double h = cfg.dt_control / sub;
  const long n = cfg.ticks();

  State y;
  y << cfg.initial.to_vector(), cfg.reference_initial, c.initial_gains.pack();

  SimTrace trace;
  trace.records.reserve(static_cast<std::size_t>(n) + 1);
  std::array<double, 2> load_force{};  // [previous, current]
  detail::run_guarded(trace, [&] {
    for (long k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) * cfg.dt_control;
      const double r = reference_waveform(sc.reference, t);
      const double tau_D = sc.disturbance(t);
      const PlantState x = PlantState::from_vector(y.segment<4>(0));
      const Eigen::Vector2d X_m = y.segment<2>(4);
      if (co_integrate) controller.set_gains(AdaptiveGains::unpack(y.segment<5>(6)));

      const CascadeCommand cmd = controller.step(x, X_m, r, euler);
      const AdaptiveGains& g = controller.gains();
      y.segment<5>(6) = g.pack();

      const GeometryEval ge = geometry_eval(x.x1, sc.plant.linkage);
      const double f_l = sc.plant.linkage.k * ge.G * x.z1;
      load_force = k == 0 ? std::array<double, 2>{f_l, f_l} : std::array<double, 2>{load_force[1], f_l};

      TraceRecord rec;
      rec.t = t;
      rec.r = r;
      rec.x1 = x.x1;
      rec.x2 = x.x2;
      rec.x_m1 = X_m[0];
      rec.x_m2 = X_m[1];
      rec.e1 = cmd.e[0];
      rec.e2 = cmd.e[1];
      rec.z1 = x.z1;
      rec.z2 = x.z2;
      rec.v_x = cmd.v_x;
      rec.v_1 = cmd.v_1;
      rec.u_eq = cmd.u_eq;
      rec.K_x1 = g.K_x[0];
      rec.K_x2 = g.K_x[1];
      rec.K_r = g.K_r;
      rec.theta1 = g.theta[0];
      rec.theta2 = g.theta[1];
      rec.tau_D = tau_D;
      rec.V_x = clf_value(cmd.e, g, detail::ideal_adaptive_gains(sc, tau_D), c.adaptation);
      rec.v_in = virtual_to_voltage(cmd.u_eq, ge.dL_dphi * x.x2, load_force, cfg.dt_control,
                                    sc.plant.motor, sc.plant.filter);
      trace.records.push_back(rec);
      if (k == n) break;

      const double u_eq = cmd.u_eq;
      auto rhs = [&](double ts, const State& ys) -> State {
        const PlantState xs = PlantState::from_vector(ys.segment<4>(0));
        State dy;
        dy.segment<4>(0) = coupled_rhs(ts, xs, u_eq, sc.disturbance, sc.plant);
        dy.segment<2>(4) = c.A_m * ys.segment<2>(4) + c.B_m * r;
        if (co_integrate) {
          const Eigen::Vector2d X(xs.x1, xs.x2);
          dy.segment<5>(6) =
              adaptation_rates(X - ys.segment<2>(4), X, r, regressor(X), c.adaptation).pack();
        } else {
          dy.segment<5>(6).setZero();
        }
        return dy;
      };
      for (int i = 0; i < sub; ++i) y = rk4_step(rhs, y, t + i * h, h);
      if (!y.allFinite()) throw NonFiniteDerivative("state left the finite range at t=" + std::to_string(t));
    }
  });
  return trace;
}

inline SimTrace run(const Scenario& sc) {
  return sc.sim.mode == SimMode::ideal_mrac ? run_ideal_mrac(sc) : run_closed_loop(sc);
}

struct Metrics {
  double peak_e1_post = 0.0;  // max |e1| for t >= cutoff
  double rms_e1_post = 0.0;
  double peak_z1 = 0.0;       // max |tau_SEA| overall
  double peak_z1_post = 0.0;
  double peak_e2 = 0.0;       // max |e2| overall
  // earliest t after which |e1| stays within settle_band; +inf if never
  double settling_time = 0.0;

  static constexpr std::array<std::string_view, 6> column_names() {
    return {"peak_e1_post", "rms_e1_post", "peak_z1", "peak_z1_post", "peak_e2", "settling_time"};
  }
  std::array<double, 6> values() const {
    return {peak_e1_post, rms_e1_post, peak_z1, peak_z1_post, peak_e2, settling_time};
  }
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

inline Metrics metrics(const SimTrace& trace, double transient_cutoff, double settle_band = 0.05) {
  if (trace.empty()) throw EmptyTrace("cannot compute metrics of an empty trace");
  Metrics m;
  double sum_sq = 0.0;
  std::size_t post = 0;
  for (const auto& rec : trace.records) {
    m.peak_z1 = std::max(m.peak_z1, std::abs(rec.z1));
    m.peak_e2 = std::max(m.peak_e2, std::abs(rec.e2));
    if (rec.t >= transient_cutoff) {
      m.peak_e1_post = std::max(m.peak_e1_post, std::abs(rec.e1));
      m.peak_z1_post = std::max(m.peak_z1_post, std::abs(rec.z1));
      sum_sq += rec.e1 * rec.e1;
      ++post;
    }
  }
  m.rms_e1_post = post ? std::sqrt(sum_sq / static_cast<double>(post)) : 0.0;

  m.settling_time = trace.records.front().t;
  for (const auto& rec : trace.records) {
    if (std::abs(rec.e1) > settle_band) m.settling_time = std::numeric_limits<double>::infinity();
    else if (std::isinf(m.settling_time)) m.settling_time = rec.t;
  }
  return m;
}

// Parameter sweep over the adaptation and back-stepping gains.
struct SweepAxis {
  std::string name;  // gamma_x11, gamma_x22, gamma_r, gamma_theta, k1, k2
  std::vector<double> values;
};

struct SweepRow {
  std::size_t index = 0;
  std::vector<double> params;
  std::string status;  // "ok" or the failure message
  Metrics metrics;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepTable {
  std::vector<std::string> param_names;
  std::vector<SweepRow> rows;
  friend bool operator==(const SweepTable&, const SweepTable&) = default;
};

inline void apply_sweep_param(Scenario& sc, std::string_view name, double v) {
  AdaptationConfig& a = sc.controller.adaptation;
  if (name == "gamma_x11") a.gamma_x(0, 0) = v;
  else if (name == "gamma_x22") a.gamma_x(1, 1) = v;
  else if (name == "gamma_r") a.gamma_r = v;
  else if (name == "gamma_theta") a.gamma_theta(0, 0) = a.gamma_theta(1, 1) = v;
  else if (name == "k1") a.k1 = v;
  else if (name == "k2") a.k2 = v;
  else throw ValidationError("unknown sweep parameter '" + std::string(name) + "'");
}

/// Cartesian grid point for a row-major index; the first axis varies slowest.
inline std::vector<double> grid_point(const std::vector<SweepAxis>& axes, std::size_t index) {
  std::vector<double> point(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    const std::size_t n = axes[i].values.size();
    point[i] = axes[i].values[index % n];
    index /= n;
  }
  return point;
}

inline SweepRow run_sweep_cell(const Scenario& base, const std::vector<SweepAxis>& axes,
                               std::size_t index) {
  SweepRow row;
  row.index = index;
  row.params = grid_point(axes, index);
  try {
    Scenario sc = base;
    for (std::size_t i = 0; i < axes.size(); ++i) apply_sweep_param(sc, axes[i].name, row.params[i]);
    validate(sc.controller.adaptation);
    row.metrics = metrics(run(sc), sc.sim.transient_cutoff);
    row.status = "ok";
  } catch (const std::exception& e) {
    row.status = e.what();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.metrics = {nan, nan, nan, nan, nan, nan};
  }
  return row;
}

// One run per grid point. threads <= 1 runs serially; otherwise cells are
// distributed over worker threads and merged back in grid order.
inline SweepTable run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes,
                            unsigned threads = 1) {
  SweepTable table;
  std::size_t cells = axes.empty() ? 0 : 1;
  for (const auto& ax : axes) {
    if (ax.values.empty()) throw ValidationError("sweep axis '" + ax.name + "' has no values");
    Scenario probe = base;
    apply_sweep_param(probe, ax.name, ax.values.front());
    table.param_names.push_back(ax.name);
    cells *= ax.values.size();
  }
  table.rows.resize(cells);
  if (threads <= 1 || cells <= 1) {
    for (std::size_t i = 0; i < cells; ++i) table.rows[i] = run_sweep_cell(base, axes, i);
    return table;
  }
  const std::size_t workers = std::min<std::size_t>(threads, cells);
  std::vector<std::future<void>> jobs;
  jobs.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < cells; i += workers) table.rows[i] = run_sweep_cell(base, axes, i);
    }));
  }
  for (auto& j : jobs) j.get();
  return table;
}

}  // namespace sea
