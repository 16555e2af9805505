#pragma once

// Coupled plant: rigid limb pendulum driven by the SEA torque, and the SEA's
// second-order torque dynamics expressed through the transmission gain G(phi).

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sea/errors.hpp"
#include "sea/linkage.hpp"

namespace sea {

// Identified DC motor + ball-screw drive. The defaults reproduce the
// identified drive polynomial 5.68*v0' + 270*v0 with n = 1; only L_ind is
// pinned by that polynomial since zeta = a0/a1 does not depend on n or lead.
struct MotorParams {
  double R = 5.56;               // ohm
  double L_ind = 1.5458406e-2;   // H
  double K_T = 0.202;            // N m / A
  double K_EMF = 0.202;          // V s / rad
  double B_M = 16.5e-5;          // N m s / rad
  double J_M = 1.57e-4;          // kg m^2
  double J_s = 2.949803e-7;      // kg m^2
  double m0 = 0.1;               // kg
  double n = 1.0;                // gearbox ratio
  double lead = 4.8064409e-3;    // m / rev
  double eta1 = 0.9;
  double eta2 = 0.9;

  friend bool operator==(const MotorParams&, const MotorParams&) = default;
};

struct SeaFilterConstants {
  double zeta = 47.535;     // 1/s
  double omega = 100.0;     // rad/s, sqrt(k / m_C)
  double mass_ratio = 1.0;  // m / m_C

  friend bool operator==(const SeaFilterConstants&, const SeaFilterConstants&) = default;
};

struct PlantState {
  double x1 = 0.0;  // phi, rad
  double x2 = 0.0;  // phi', rad/s
  double z1 = 0.0;  // tau_SEA, N m
  double z2 = 0.0;  // tau_SEA', N m/s

  Eigen::Vector4d to_vector() const { return {x1, x2, z1, z2}; }
  static PlantState from_vector(const Eigen::Ref<const Eigen::Vector4d>& v) {
    return {v[0], v[1], v[2], v[3]};
  }
  friend bool operator==(const PlantState&, const PlantState&) = default;
};

struct DisturbanceProfile {
  enum class Kind { zero, constant, sinusoid, piecewise };

  Kind kind = Kind::zero;
  double amplitude = 0.0;  // N m
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
  // piecewise-constant breakpoints (t_i, tau_i), sorted by t; zero before the first
  std::vector<std::pair<double, double>> points;

  double operator()(double t) const {
    switch (kind) {
      case Kind::zero:
        return 0.0;
      case Kind::constant:
        return amplitude;
      case Kind::sinusoid:
        return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase);
      case Kind::piecewise: {
        auto it = std::upper_bound(points.begin(), points.end(), t,
                                   [](double v, const auto& pt) { return v < pt.first; });
        return it == points.begin() ? 0.0 : std::prev(it)->second;
      }
    }
    return 0.0;
  }

  friend bool operator==(const DisturbanceProfile&, const DisturbanceProfile&) = default;
};

struct PlantParams {
  LinkageParams linkage;
  double damping = 0.5;  // D, N m s
  MotorParams motor;
  SeaFilterConstants filter;

  /// 1 / (m d3^2)
  double lambda() const { return 1.0 / (linkage.m * linkage.d3 * linkage.d3); }

  friend bool operator==(const PlantParams&, const PlantParams&) = default;
};

inline double equivalent_inertia(const MotorParams& mp) {
  const double n2 = mp.n * mp.n;
  return mp.J_M + mp.J_s / (n2 * mp.eta1) +
         mp.lead * mp.lead * mp.m0 /
             (4.0 * std::numbers::pi * std::numbers::pi * n2 * mp.eta1 * mp.eta2);
}

/// Coefficients of U_v* = a2 v0'' + a1 v0' + a0 v0.
struct DriveCoefficients {
  double a2;
  double a1;
  double a0;
};

inline DriveCoefficients drive_coefficients(const MotorParams& mp) {
  const double scale = 2.0 * std::numbers::pi * mp.n / (mp.lead * mp.K_T);
  const double J_eq = equivalent_inertia(mp);
  return {scale * mp.L_ind * J_eq, scale * (mp.R * J_eq + mp.L_ind * mp.B_M),
          scale * (mp.B_M * mp.R + mp.K_EMF * mp.K_T)};
}

// The a2 (inductance * inertia) term is dropped; zeta = a0 / a1 unless overridden.
inline SeaFilterConstants sea_filter_constants(const MotorParams& mp, double k, double m,
                                               double mass_ratio,
                                               std::optional<double> zeta_override = {}) {
  SeaFilterConstants fc;
  if (zeta_override) {
    fc.zeta = *zeta_override;
  } else {
    const DriveCoefficients c = drive_coefficients(mp);
    fc.zeta = c.a0 / c.a1;
  }
  fc.mass_ratio = mass_ratio;
  fc.omega = std::sqrt(k * mass_ratio / m);
  return fc;
}

/// (x1', x2') of the limb; x2' is phi''.
inline Eigen::Vector2d limb_rhs(const PlantState& s, double tau_D, const PlantParams& p) {
  const LinkageParams& l = p.linkage;
  const double lam = p.lambda();
  const double phi_ddot = -p.damping * lam * s.x2 - (l.g / l.d3) * std::sin(s.x1) +
                          lam * tau_D + lam * s.z1;
  return {s.x2, phi_ddot};
}

// z2' = f2 + g2 * u_eq. include_zeta = false drops the zeta terms from the drift
// (the literal second augmented system of the back-stepping design).
struct SeaDrift {
  double f2;
  double g2;
};

inline SeaDrift sea_drift(const PlantState& s, double phi_ddot, const PlantParams& p,
                          bool include_zeta = true) {
  const LinkageParams& l = p.linkage;
  const SeaFilterConstants& fc = p.filter;
  const GeometryEval ge = geometry_eval(s.x1, l);
  const double G = ge.G;
  const double G_dot = ge.dG_dphi * s.x2;
  const double G_ddot = ge.d2G_dphi2 * s.x2 * s.x2 + ge.dG_dphi * phi_ddot;
  const double w2 = fc.omega * fc.omega;
  const double zeta = include_zeta ? fc.zeta : 0.0;
  const double gravity = fc.mass_ratio * l.g * l.d3 * std::sin(s.x1) / (l.d6 * ge.sin_gamma);
  const double bracket = -s.z2 * (2.0 * G_dot + zeta * G) -
                         s.z1 * (G_ddot + w2 * G + zeta * G_dot) - gravity;
  return {bracket / G, 1.0 / G};
}

/// (z1', z2'). phi_ddot must come from limb_rhs at the same state.
inline Eigen::Vector2d sea_rhs(const PlantState& s, double phi_ddot, double u_eq,
                               const PlantParams& p) {
  const SeaDrift d = sea_drift(s, phi_ddot, p);
  return {s.z2, d.f2 + d.g2 * u_eq};
}

inline Eigen::Vector4d coupled_rhs(double t, const PlantState& s, double u_eq,
                                   const DisturbanceProfile& dist, const PlantParams& p) {
  const Eigen::Vector2d limb = limb_rhs(s, dist(t), p);
  const Eigen::Vector2d sea = sea_rhs(s, limb[1], u_eq, p);
  return {limb[0], limb[1], sea[0], sea[1]};
}

/// Load torque at the motor shaft for a ball-screw load force F_L.
inline double load_torque(double f_l, const MotorParams& mp) {
  return mp.lead * f_l / (2.0 * std::numbers::pi * mp.n * mp.eta1 * mp.eta2);
}

// Motor voltage implied by a virtual control u_eq. Diagnostic only.
//   U_v   = zeta * x_C' - u_eq
//   V_IN  = a1 * U_v + (R T_L - L T_L') / K_T
// T_L' is the backward difference of the last two load-force samples.
inline double virtual_to_voltage(double u_eq, double x_c_dot, std::span<const double> f_l_trace,
                                 double dt, const MotorParams& mp, const SeaFilterConstants& fc) {
  if (f_l_trace.size() < 2) {
    throw InsufficientTrace("need at least 2 load-force samples, got " +
                            std::to_string(f_l_trace.size()));
  }
  const double f_now = f_l_trace[f_l_trace.size() - 1];
  const double f_prev = f_l_trace[f_l_trace.size() - 2];
  const double T_L = load_torque(f_now, mp);
  const double T_L_dot = (T_L - load_torque(f_prev, mp)) / dt;
  const double U_v = fc.zeta * x_c_dot - u_eq;
  const double a1 = drive_coefficients(mp).a1;
  return a1 * U_v + (mp.R * T_L - mp.L_ind * T_L_dot) / mp.K_T;
}

inline void validate(const MotorParams& mp) {
  const std::pair<double, const char*> positive[] = {
      {mp.R, "R"},       {mp.K_T, "K_T"},   {mp.K_EMF, "K_EMF"}, {mp.J_M, "J_M"},
      {mp.n, "n"},       {mp.lead, "lead"}, {mp.eta1, "eta1"},   {mp.eta2, "eta2"}};
  for (const auto& [v, name] : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("motor.") + name + " must be finite and > 0");
    }
  }
  const std::pair<double, const char*> non_negative[] = {
      {mp.L_ind, "L_ind"}, {mp.B_M, "B_M"}, {mp.J_s, "J_s"}, {mp.m0, "m0"}};
  for (const auto& [v, name] : non_negative) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("motor.") + name + " must be finite and >= 0");
    }
  }
  if (mp.eta1 > 1.0 || mp.eta2 > 1.0) throw ValidationError("motor efficiencies must be <= 1");
}

}  // namespace sea
