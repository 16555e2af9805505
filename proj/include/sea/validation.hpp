#pragma once

// Self-contained invariant suite behind `sea_sim validate`.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sea/controller.hpp"
#include "sea/integrator.hpp"
#include "sea/linkage.hpp"
#include "sea/lyapunov.hpp"
#include "sea/plant.hpp"
#include "sea/simulation.hpp"

namespace sea {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

}  // namespace detail

/// Worst relative errors of the analytic G', G'' against central differences.
struct GeometryFdReport {
  double worst_first = 0.0;
  double worst_second = 0.0;
};

inline GeometryFdReport geometry_fd_check(const LinkageParams& p, int samples = 241) {
  GeometryFdReport rep;
  auto G = [&](double phi) { return geometry_eval(phi, p).G; };
  for (int i = 0; i < samples; ++i) {
    const double phi = p.phi_min + (p.phi_max - p.phi_min) * i / (samples - 1);
    const GeometryEval ge = geometry_eval(phi, p);
    const double h1 = 1e-5;
    const double fd1 = (G(phi + h1) - G(phi - h1)) / (2.0 * h1);
    const double h2 = 1e-4;
    const double fd2 = (G(phi + h2) - 2.0 * ge.G + G(phi - h2)) / (h2 * h2);
    rep.worst_first = std::max(rep.worst_first, detail::rel_err(ge.dG_dphi, fd1));
    rep.worst_second = std::max(rep.worst_second, detail::rel_err(ge.d2G_dphi2, fd2));
  }
  return rep;
}

// Worst relative violation of z2' = v1' - k2 (z2 - v1) - (z1 - v_x) when the
// plant is driven by backstep_ueq, over uniformly drawn states.
inline double backstepping_cancellation_error(const PlantParams& p, const AdaptationConfig& cfg,
                                              int samples = 10000, unsigned seed = 12345) {
  std::mt19937_64 rng(seed);
  const LinkageParams& l = p.linkage;
  std::uniform_real_distribution<double> phi(l.phi_min, l.phi_max);
  std::uniform_real_distribution<double> rate(-3.0, 3.0);
  std::uniform_real_distribution<double> torque(-10.0, 10.0);
  std::uniform_real_distribution<double> torque_rate(-100.0, 100.0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const PlantState s{phi(rng), rate(rng), torque(rng), torque_rate(rng)};
    const double v_x = torque(rng);
    const double v1 = torque_rate(rng);
    const double v1_dot = 10.0 * torque_rate(rng);
    const double phi_ddot = limb_rhs(s, 0.0, p)[1];
    const double u = backstep_ueq(s, phi_ddot, v_x, v1, v1_dot, cfg, p);
    const double z2_dot = sea_rhs(s, phi_ddot, u, p)[1];
    const double want = v1_dot - cfg.k2 * (s.z2 - v1) - (s.z1 - v_x);
    worst = std::max(worst, std::abs(z2_dot - want) / std::max(1.0, std::abs(want)));
  }
  return worst;
}

/// Least-squares slope of log(error) against log(h) for RK4 on x' = -x over [0, 1].
inline double rk4_fitted_order() {
  const double hs[] = {0.1, 0.05, 0.025, 0.0125};
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double h : hs) {
    const int n = static_cast<int>(std::lround(1.0 / h));
    double x = 1.0;
    for (int i = 0; i < n; ++i) x = rk4_step([](double, double y) { return -y; }, x, i * h, h);
    const double lx = std::log(h);
    const double ly = std::log(std::abs(x - std::exp(-1.0)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = std::size(hs);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Largest per-tick increase of V_x over an ideal-mode trace.
inline double max_clf_increase(const SimTrace& trace) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    worst = std::max(worst, trace.records[i].V_x - trace.records[i - 1].V_x);
  }
  return worst;
}

inline std::vector<CheckResult> run_invariant_suite(const Scenario& sc) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, e.what());
    }
  };

  guarded("geometry derivatives", [&] {
    const GeometryFdReport rep = geometry_fd_check(sc.plant.linkage);
    add("geometry derivatives", rep.worst_first <= 1e-6 && rep.worst_second <= 1e-4,
        "dG rel " + detail::sci(rep.worst_first) + " (<= 1e-6), d2G rel " + detail::sci(rep.worst_second) +
            " (<= 1e-4)");
  });

  guarded("lyapunov residual", [&] {
    const Eigen::Matrix2d& A = sc.controller.A_m;
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    const double res_i = lyapunov_residual(A, I, solve_lyapunov(A, I));
    const Eigen::Matrix2d& Q = sc.controller.adaptation.Q;
    const double res_q = lyapunov_residual(A, Q, solve_lyapunov(A, Q));
    add("lyapunov residual", res_i <= 1e-12 && res_q <= 1e-12,
        "Q=I " + detail::sci(res_i) + ", configured Q " + detail::sci(res_q) + " (<= 1e-12)");
  });

  guarded("printed P consistency", [&] {
    // The printed P must be flagged: the Q it implies for A_m is indefinite.
    const Eigen::Matrix2d Qp = implied_q(sc.controller.A_m, printed_P());
    const bool indefinite = !is_spd(Qp);
    add("printed P consistency", indefinite,
        std::string(indefinite ? "detected: " : "not detected: ") + "implied Q = [" +
            detail::sci(Qp(0, 0)) + ", " + detail::sci(Qp(0, 1)) + "; " + detail::sci(Qp(1, 0)) + ", " +
            detail::sci(Qp(1, 1)) + "], det " + detail::sci(Qp.determinant()) +
            (indefinite ? ", indefinite" : ""));
  });

  guarded("matching conditions", [&] {
    const Eigen::Matrix2d A = limb_drift_matrix(sc.model);
    const AdaptationConfig& a = sc.controller.adaptation;
    const IdealGains ig = ideal_gains(A, a.B, a.Lambda, sc.controller.A_m, sc.controller.B_m);
    const double err = (A + a.B * a.Lambda * ig.K_x.transpose() - sc.controller.A_m).cwiseAbs().maxCoeff();
    add("matching conditions", err <= 1e-10, "closed loop vs A_m " + detail::sci(err) + " (<= 1e-10)");
  });

  guarded("clf monotone", [&] {
    Scenario ideal = sc;
    ideal.sim.mode = SimMode::ideal_mrac;
    ideal.sim.duration = 5.0;
    const double worst = max_clf_increase(run(ideal));
    add("clf monotone", worst <= 1e-9, "largest per-step increase " + detail::sci(worst) + " (<= 1e-9)");
  });

  guarded("backstepping cancellation", [&] {
    const double err = backstepping_cancellation_error(sc.model, sc.controller.adaptation);
    add("backstepping cancellation", err <= 1e-10, "worst relative " + detail::sci(err) + " (<= 1e-10)");
  });

  guarded("rk4 order", [&] {
    const double order = rk4_fitted_order();
    add("rk4 order", order >= 3.8, "fitted order " + std::to_string(order) + " (>= 3.8)");
  });
  return out;
}

}  // namespace sea
