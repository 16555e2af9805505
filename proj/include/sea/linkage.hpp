#pragma once

// Planar SEA linkage: the actuator spans a triangle formed by the fixed base
// offset (d4, d5) from the hip pivot and the lever d6 that rotates with the
// limb. Everything here is a pure function of the joint angle.

#include <cmath>
#include <numbers>
#include <string>

#include "sea/errors.hpp"

namespace sea {

/// Radicand floor for the SEA length (m^2). Below it the linkage is locked.
inline constexpr double kFeasibilityEps = 1e-9;
/// Admissible sines live in (kAngleEps, 1 + kAngleEps].
inline constexpr double kAngleEps = 1e-9;

struct LinkageParams {
  double d1 = 0.0280;  // stored for completeness, unused by the dynamics
  double d2 = 0.0525;  // stored for completeness, unused by the dynamics
  double d3 = 0.0525;  // pivot to limb centre of mass
  double d4 = 0.0350;
  double d5 = 0.1180;
  double d6 = 0.0400;  // lever arm carrying the SEA end
  double d7 = std::hypot(0.0350, 0.1180);
  // beta = phi + beta_offset
  double beta_offset = 1.8;
  double k = 20000.0;  // spring stiffness, N/m
  double m = 2.0;      // limb mass, kg
  double g = 9.81;
  double phi_min = -0.6;
  double phi_max = 0.6;

  friend bool operator==(const LinkageParams&, const LinkageParams&) = default;
};

struct GeometryEval {
  double L_sea = 0.0;
  double dL_dphi = 0.0;
  double sin_delta = 0.0;
  double sin_gamma = 0.0;
  double G = 0.0;  // deflection per unit SEA torque
  double dG_dphi = 0.0;
  double d2G_dphi2 = 0.0;
};

/// Interior angle at the pivot between the base offset (d4, d5) and the lever d6.
inline double pivot_angle(double phi, const LinkageParams& p) {
  const double beta = phi + p.beta_offset;
  return beta - std::atan2(p.d5, p.d4) + std::numbers::pi / 2.0;
}

inline double lsea_length(double phi, const LinkageParams& p) {
  const double beta = phi + p.beta_offset;
  const double radicand = p.d4 * p.d4 + p.d5 * p.d5 + p.d6 * p.d6 +
                          2.0 * p.d6 * (p.d4 * std::sin(beta) - p.d5 * std::cos(beta));
  if (!(radicand >= kFeasibilityEps)) {
    throw InfeasibleGeometry("SEA length radicand " + std::to_string(radicand) +
                             " at phi=" + std::to_string(phi));
  }
  return std::sqrt(radicand);
}

struct AngleSines {
  double sin_delta;
  double sin_gamma;
};

// delta is the angle opposite the base offset r = |(d4, d5)| in the triangle
// (r, d6, L_sea), i.e. between the lever and the SEA axis. sin(gamma) is fixed
// by requiring d6*sin(gamma) = d6*d7*sin(delta)/L_sea.
inline AngleSines angle_sines(double phi, const LinkageParams& p) {
  const double L = lsea_length(phi, p);
  const double r = std::hypot(p.d4, p.d5);
  const double sd = r * std::sin(pivot_angle(phi, p)) / L;
  const double sg = p.d7 * sd / L;
  auto check = [phi](double s, const char* name) {
    if (!(s > kAngleEps && s <= 1.0 + kAngleEps)) {
      throw DegenerateAngle(std::string(name) + "=" + std::to_string(s) +
                            " at phi=" + std::to_string(phi));
    }
  };
  check(sd, "sin_delta");
  check(sg, "sin_gamma");
  return {sd, sg};
}

/// Gravity torque of the limb about the hip pivot.
inline double gravity_reaction_torque(double phi, const LinkageParams& p) {
  return p.m * p.g * p.d3 * std::sin(phi);
}

/// Force along the SEA balancing the gravity torque.
inline double reaction_force(double phi, const LinkageParams& p) {
  const AngleSines s = angle_sines(phi, p);
  return gravity_reaction_torque(phi, p) / (p.d6 * s.sin_gamma);
}

// G and its phi-derivatives. With theta the pivot angle,
//   L^2 = a - b cos(theta),  a = r^2 + d6^2,  b = 2 r d6
//   G   = -L^2 / (k d6 d7 r sin(theta))
// so G is a quotient u/v with u = L^2, v = sin(theta), dtheta/dphi = 1.
inline GeometryEval geometry_eval(double phi, const LinkageParams& p) {
  const AngleSines s = angle_sines(phi, p);
  const double L = lsea_length(phi, p);
  const double r = std::hypot(p.d4, p.d5);
  const double theta = pivot_angle(phi, p);
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  const double b = 2.0 * r * p.d6;
  const double c = -1.0 / (p.k * p.d6 * p.d7 * r);

  const double u = L * L;
  const double du = b * st;
  const double d2u = b * ct;
  const double v = st;
  const double dv = ct;
  const double d2v = -st;
  const double num1 = du * v - u * dv;
  const double dh = num1 / (v * v);
  const double d2h = (d2u * v - u * d2v) / (v * v) - 2.0 * dv * num1 / (v * v * v);

  GeometryEval out;
  out.L_sea = L;
  out.dL_dphi = du / (2.0 * L);
  out.sin_delta = s.sin_delta;
  out.sin_gamma = s.sin_gamma;
  out.G = -L / (p.k * p.d6 * p.d7 * s.sin_delta);
  out.dG_dphi = c * dh;
  out.d2G_dphi2 = c * d2h;
  return out;
}

inline double torque_from_deflection(double deflection, double phi, const LinkageParams& p) {
  const double L = lsea_length(phi, p);
  const AngleSines s = angle_sines(phi, p);
  return deflection * (-p.k * p.d6 * p.d7 * s.sin_delta / L);
}

inline double deflection_from_torque(double tau, double phi, const LinkageParams& p) {
  return tau * geometry_eval(phi, p).G;
}

/// Throws ValidationError naming the first violated constraint.
inline void validate(const LinkageParams& p, int samples = 121) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be finite and > 0");
    }
  };
  positive(p.d1, "d1");
  positive(p.d2, "d2");
  positive(p.d3, "d3");
  positive(p.d4, "d4");
  positive(p.d5, "d5");
  positive(p.d6, "d6");
  positive(p.d7, "d7");
  positive(p.k, "k");
  positive(p.m, "m");
  positive(p.g, "g");
  if (!(p.phi_min < p.phi_max)) throw ValidationError("phi_min must be < phi_max");
  for (int i = 0; i < samples; ++i) {
    const double phi = p.phi_min + (p.phi_max - p.phi_min) * i / (samples - 1);
    try {
      const GeometryEval ge = geometry_eval(phi, p);
      if (!(ge.G < 0.0)) throw ValidationError("G(phi) must be negative");
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError(std::string("linkage infeasible over operating range: ") + e.what());
    }
  }
}

}  // namespace sea
