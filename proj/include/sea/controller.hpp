#pragma once

// Model-reference adaptive torque law for the limb, cascaded through two
// back-stepping stages down to the SEA's virtual control input.

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "sea/errors.hpp"
#include "sea/integrator.hpp"
#include "sea/lyapunov.hpp"
#include "sea/plant.hpp"

namespace sea {

class ReferenceModel {
 public:
  ReferenceModel(const Eigen::Matrix2d& A_m, const Eigen::Vector2d& B_m,
                 const Eigen::Vector2d& X_m = Eigen::Vector2d::Zero())
      : A_m_(A_m), B_m_(B_m), X_m_(X_m) {
    if (!is_hurwitz(A_m)) throw NotHurwitz("reference model A_m is not Hurwitz");
  }

  const Eigen::Matrix2d& A_m() const { return A_m_; }
  const Eigen::Vector2d& B_m() const { return B_m_; }
  const Eigen::Vector2d& state() const { return X_m_; }
  void set_state(const Eigen::Vector2d& X_m) { X_m_ = X_m; }

  Eigen::Vector2d derivative(const Eigen::Vector2d& X_m, double r) const {
    return A_m_ * X_m + B_m_ * r;
  }

 private:
  Eigen::Matrix2d A_m_;
  Eigen::Vector2d B_m_;
  Eigen::Vector2d X_m_;
};

/// Integrates the reference model over dt with r held, using `substeps` RK4 steps.
inline const Eigen::Vector2d& reference_step(ReferenceModel& rm, double r, double dt,
                                             int substeps = 1) {
  const double h = dt / substeps;
  Eigen::Vector2d x = rm.state();
  auto rhs = [&](double, const Eigen::Vector2d& y) -> Eigen::Vector2d {
    return rm.derivative(y, r);
  };
  for (int i = 0; i < substeps; ++i) x = rk4_step(rhs, x, i * h, h);
  rm.set_state(x);
  return rm.state();
}

struct AdaptiveGains {
  Eigen::Vector2d K_x = Eigen::Vector2d::Zero();
  double K_r = 0.0;
  Eigen::Vector2d theta = Eigen::Vector2d::Zero();  // multiplies [sin x1, 1]

  using Packed = Eigen::Matrix<double, 5, 1>;
  Packed pack() const {
    Packed v;
    v << K_x, K_r, theta;
    return v;
  }
  static AdaptiveGains unpack(const Eigen::Ref<const Packed>& v) {
    return {v.segment<2>(0), v[2], v.segment<2>(3)};
  }
  bool all_finite() const { return pack().allFinite(); }

  friend bool operator==(const AdaptiveGains&, const AdaptiveGains&) = default;
};

struct AdaptationConfig {
  Eigen::Matrix2d gamma_x = Eigen::Vector2d(4000.0, 50.0).asDiagonal();
  double gamma_r = 2000.0;
  Eigen::Matrix2d gamma_theta = Eigen::Vector2d(50.0, 50.0).asDiagonal();
  Eigen::Matrix2d Q = Eigen::Vector2d(3.0, 1.0).asDiagonal();
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
  double k1 = 30.0;
  double k2 = 10.0;
  Eigen::Vector2d B = Eigen::Vector2d(0.0, 1.0);
  double Lambda = 1.0;

  /// e^T P B
  double error_projection(const Eigen::Vector2d& e) const { return e.dot(P * B); }

  friend bool operator==(const AdaptationConfig&, const AdaptationConfig&) = default;
};

inline void validate(const AdaptationConfig& cfg) {
  auto spd = [](const Eigen::Matrix2d& M, const char* name) {
    if (!is_spd(M)) throw ValidationError(std::string(name) + " is not symmetric positive definite");
  };
  spd(cfg.gamma_x, "gamma_x");
  spd(cfg.gamma_theta, "gamma_theta");
  spd(cfg.Q, "Q");
  spd(cfg.P, "P");
  if (!(cfg.gamma_r > 0.0)) throw ValidationError("gamma_r must be > 0");
  if (!(cfg.k1 > 0.0)) throw ValidationError("k1 must be > 0");
  if (!(cfg.k2 > 0.0)) throw ValidationError("k2 must be > 0");
  if (!(cfg.Lambda > 0.0)) throw ValidationError("Lambda must be > 0");
}

/// Known nonlinearity basis [sin x1, 1].
inline Eigen::Vector2d regressor(const Eigen::Vector2d& X) { return {std::sin(X[0]), 1.0}; }

/// Torque the limb should receive: K_x^T X + K_r r + theta^T Phi(X).
inline double control_vx(const AdaptiveGains& g, const Eigen::Vector2d& X, double r) {
  return g.K_x.dot(X) + g.K_r * r + g.theta.dot(regressor(X));
}

/// Gradient adaptation laws driven by e^T P B. Returned as gain time-derivatives.
inline AdaptiveGains adaptation_rates(const Eigen::Vector2d& e, const Eigen::Vector2d& X, double r,
                                      const Eigen::Vector2d& Phi, const AdaptationConfig& cfg) {
  const double s = cfg.error_projection(e);
  return {-cfg.gamma_x * X * s, -cfg.gamma_r * r * s, -cfg.gamma_theta * Phi * s};
}

struct IdealGains {
  Eigen::Vector2d K_x;
  double K_r;
};

// Matching conditions A + B Lambda K_x^T = A_m and B Lambda K_r = B_m. With
// B = [0, 1]^T only the second rows can be matched, so the first rows of
// A and A_m (and B_m) must already agree.
inline IdealGains ideal_gains(const Eigen::Matrix2d& A, const Eigen::Vector2d& B, double Lambda,
                              const Eigen::Matrix2d& A_m, const Eigen::Vector2d& B_m,
                              double tol = 1e-12) {
  if (B[0] != 0.0 || B[1] == 0.0 || Lambda == 0.0) {
    throw MatchingInfeasible("B Lambda must have the structure [0, b]");
  }
  const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), A_m.cwiseAbs().maxCoeff()});
  if ((A.row(0) - A_m.row(0)).cwiseAbs().maxCoeff() > tol * scale ||
      std::abs(B_m[0]) > tol * std::max(1.0, std::abs(B_m[1]))) {
    throw MatchingInfeasible("first rows of A and A_m (or B_m) differ");
  }
  const double b = B[1] * Lambda;
  IdealGains ig{(A_m.row(1) - A.row(1)).transpose() / b, B_m[1] / b};
  const Eigen::Matrix2d closed = A + B * Lambda * ig.K_x.transpose();
  if ((closed - A_m).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw MatchingInfeasible("reconstructed closed loop differs from A_m");
  }
  return ig;
}

/// Drift matrix A of the limb in MRAC form.
inline Eigen::Matrix2d limb_drift_matrix(const PlantParams& p) {
  Eigen::Matrix2d A;
  A << 0.0, 1.0, 0.0, -p.damping * p.lambda();
  return A;
}

/// True-parameter vector Theta = [m g d3, -tau_D] of f = Theta^T Phi(X).
inline Eigen::Vector2d true_theta(const PlantParams& p, double tau_D) {
  const LinkageParams& l = p.linkage;
  return {l.m * l.g * l.d3, -tau_D};
}

// Candidate Lyapunov function
//   V = e^T P e + Lambda (dKx^T gx^-1 dKx + dKr^2 / gr + dth^T gth^-1 dth)
inline double clf_value(const Eigen::Vector2d& e, const AdaptiveGains& gains,
                        const AdaptiveGains& ideal, const AdaptationConfig& cfg) {
  const Eigen::Vector2d dKx = gains.K_x - ideal.K_x;
  const double dKr = gains.K_r - ideal.K_r;
  const Eigen::Vector2d dth = gains.theta - ideal.theta;
  return e.dot(cfg.P * e) +
         cfg.Lambda * (dKx.dot(cfg.gamma_x.lu().solve(dKx)) + dKr * dKr / cfg.gamma_r +
                       dth.dot(cfg.gamma_theta.lu().solve(dth)));
}

/// First back-stepping stage: pseudo-control for z1' = z2.
inline double backstep_v1(const Eigen::Vector2d& e, double z1, double v_x, double v_x_dot,
                          const AdaptationConfig& cfg) {
  return v_x_dot - 2.0 * cfg.error_projection(e) * cfg.Lambda - cfg.k1 * (z1 - v_x);
}

// Second stage: the SEA virtual control. With drift_without_zeta the drift omits the
// zeta terms, which leaves them uncancelled in the closed loop.
inline double backstep_ueq(const PlantState& s, double phi_ddot, double v_x, double v1,
                           double v1_dot, const AdaptationConfig& cfg, const PlantParams& p,
                           bool drift_without_zeta = false) {
  const SeaDrift d = sea_drift(s, phi_ddot, p, !drift_without_zeta);
  return (-d.f2 + v1_dot - cfg.k2 * (s.z2 - v1) - (s.z1 - v_x)) / d.g2;
}

// Backward difference followed by a first-order low-pass
//   y_k = y_{k-1} + dt / (tau + dt) * ((s_k - s_{k-1}) / dt - y_{k-1})
// The first sample yields 0.
class DerivativeEstimator {
 public:
  DerivativeEstimator(double dt, double tau) : dt_(dt), alpha_(dt / (tau + dt)) {
    if (!(dt > 0.0)) throw ValidationError("derivative estimator dt must be > 0");
    if (!(tau >= 0.0)) throw ValidationError("derivative estimator tau must be >= 0");
  }

  double update(double sample) {
    if (!previous_) {
      previous_ = sample;
      return output_;
    }
    const double raw = (sample - *previous_) / dt_;
    previous_ = sample;
    output_ += alpha_ * (raw - output_);
    return output_;
  }

  double value() const { return output_; }
  double alpha() const { return alpha_; }

 private:
  double dt_;
  double alpha_;
  std::optional<double> previous_;
  double output_ = 0.0;
};

struct CascadeCommand {
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  double v_x = 0.0;
  double v_x_dot = 0.0;
  double v_1 = 0.0;
  double v_1_dot = 0.0;
  double u_eq = 0.0;
};

// One writer advances it once per control tick. The reference model and the
// plant are integrated outside; this holds the gains and derivative filters.
class CascadeController {
 public:
  CascadeController(AdaptationConfig cfg, PlantParams model, double dt_control,
                    double derivative_tau, bool drift_without_zeta = false, AdaptiveGains initial = {})
      : cfg_(std::move(cfg)),
        model_(std::move(model)),
        dt_(dt_control),
        drift_without_zeta_(drift_without_zeta),
        gains_(std::move(initial)),
        vx_rate_(dt_control, derivative_tau),
        v1_rate_(dt_control, derivative_tau) {}

  // euler_adapt advances the gains by one forward-Euler step before the
  // torque law is evaluated; pass false when the gains are co-integrated.
  CascadeCommand step(const PlantState& x, const Eigen::Vector2d& X_m, double r,
                      bool euler_adapt = true) {
    CascadeCommand c;
    const Eigen::Vector2d X(x.x1, x.x2);
    c.e = X - X_m;
    if (euler_adapt) {
      const AdaptiveGains rate = adaptation_rates(c.e, X, r, regressor(X), cfg_);
      gains_ = AdaptiveGains::unpack(gains_.pack() + dt_ * rate.pack());
    }
    c.v_x = control_vx(gains_, X, r);
    c.v_x_dot = vx_rate_.update(c.v_x);
    c.v_1 = backstep_v1(c.e, x.z1, c.v_x, c.v_x_dot, cfg_);
    c.v_1_dot = v1_rate_.update(c.v_1);
    const double phi_ddot = limb_rhs(x, 0.0, model_)[1];
    c.u_eq = backstep_ueq(x, phi_ddot, c.v_x, c.v_1, c.v_1_dot, cfg_, model_, drift_without_zeta_);
    return c;
  }

  const AdaptiveGains& gains() const { return gains_; }
  void set_gains(const AdaptiveGains& g) { gains_ = g; }
  const AdaptationConfig& config() const { return cfg_; }
  const PlantParams& model() const { return model_; }

 private:
  AdaptationConfig cfg_;
  PlantParams model_;
  double dt_;
  bool drift_without_zeta_;
  AdaptiveGains gains_;
  DerivativeEstimator vx_rate_;
  DerivativeEstimator v1_rate_;
};

}  // namespace sea
