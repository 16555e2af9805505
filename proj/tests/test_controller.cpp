#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "sea/controller.hpp"
#include "sea/validation.hpp"

namespace {

using sea::AdaptationConfig;
using sea::AdaptiveGains;
using sea::PlantParams;

const Eigen::Matrix2d kAm = (Eigen::Matrix2d() << 0.0, 1.0, -6.0, -4.0).finished();
const Eigen::Vector2d kBm(0.0, 6.0);

AdaptationConfig nominal_config() {
  AdaptationConfig cfg;
  cfg.P = sea::solve_lyapunov(kAm, cfg.Q);
  cfg.Lambda = PlantParams{}.lambda();
  return cfg;
}

TEST(Controller, ReferenceModelRejectsUnstable) {
  Eigen::Matrix2d bad;
  bad << 0.0, 1.0, 6.0, 4.0;
  EXPECT_THROW(sea::ReferenceModel(bad, kBm), sea::NotHurwitz);
}

TEST(Controller, ReferenceModelFreeResponse) {
  // eigenvalues -2 +- i sqrt(2): x1 = e^{-2t} (cos wt + (2/w) sin wt) from (1, 0)
  sea::ReferenceModel rm(kAm, kBm, Eigen::Vector2d(1.0, 0.0));
  const double w = std::sqrt(2.0);
  for (int k = 1; k <= 100; ++k) {
    sea::reference_step(rm, 0.0, 0.01, 10);
    const double t = 0.01 * k;
    EXPECT_NEAR(rm.state()[0], std::exp(-2.0 * t) * (std::cos(w * t) + 2.0 / w * std::sin(w * t)), 1e-12);
  }
}

TEST(Controller, ReferenceModelDcGain) {
  sea::ReferenceModel rm(kAm, kBm);
  for (int k = 0; k < 2000; ++k) sea::reference_step(rm, 0.3, 0.01, 4);
  EXPECT_NEAR(rm.state()[0], 0.3, 1e-12);
  EXPECT_NEAR(rm.state()[1], 0.0, 1e-12);
}

TEST(Controller, IdealGainsFromTableValues) {
  const PlantParams p;
  const double lam = 1.0 / (2.0 * 0.0525 * 0.0525);
  const auto ig = sea::ideal_gains(sea::limb_drift_matrix(p), Eigen::Vector2d(0.0, 1.0), lam, kAm, kBm);
  EXPECT_NEAR(ig.K_x[0], -6.0 / lam, 1e-15);
  EXPECT_NEAR(ig.K_x[1], 0.5 - 4.0 / lam, 1e-15);
  EXPECT_NEAR(ig.K_r, 6.0 / lam, 1e-15);
  EXPECT_NEAR(ig.K_x[0], -0.033075, 5e-7);
  EXPECT_NEAR(ig.K_x[1], 0.47795, 5e-6);
  const Eigen::Matrix2d A = sea::limb_drift_matrix(p);
  const Eigen::Matrix2d closed = A + Eigen::Vector2d(0.0, 1.0) * lam * ig.K_x.transpose();
  EXPECT_LE((closed - kAm).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Controller, MatchingInfeasible) {
  Eigen::Matrix2d A;
  A << 0.0, 2.0, 0.0, -1.0;  // first row cannot be matched through B = [0, 1]
  EXPECT_THROW(sea::ideal_gains(A, Eigen::Vector2d(0.0, 1.0), 1.0, kAm, kBm), sea::MatchingInfeasible);
  EXPECT_THROW(sea::ideal_gains(kAm, Eigen::Vector2d(1.0, 1.0), 1.0, kAm, kBm), sea::MatchingInfeasible);
}

TEST(Controller, ControlLawAndRegressor) {
  AdaptiveGains g;
  g.K_x = Eigen::Vector2d(1.0, 2.0);
  g.K_r = 3.0;
  g.theta = Eigen::Vector2d(4.0, 5.0);
  const Eigen::Vector2d X(0.3, -0.2);
  EXPECT_NEAR(sea::control_vx(g, X, 0.1), 0.3 - 0.4 + 0.3 + 4.0 * std::sin(0.3) + 5.0, 1e-15);
  EXPECT_EQ(AdaptiveGains::unpack(g.pack()), g);
}

TEST(Controller, AdaptationRatesFollowGradient) {
  const AdaptationConfig cfg = nominal_config();
  const Eigen::Vector2d e(0.01, -0.02), X(0.2, 0.1);
  const double r = 0.15;
  const Eigen::Vector2d Phi = sea::regressor(X);
  const double s = e.dot(cfg.P * Eigen::Vector2d(0.0, 1.0));
  const AdaptiveGains rate = sea::adaptation_rates(e, X, r, Phi, cfg);
  EXPECT_NEAR(rate.K_x[0], -4000.0 * X[0] * s, 1e-12);
  EXPECT_NEAR(rate.K_x[1], -50.0 * X[1] * s, 1e-12);
  EXPECT_NEAR(rate.K_r, -2000.0 * r * s, 1e-12);
  EXPECT_NEAR(rate.theta[0], -50.0 * std::sin(X[0]) * s, 1e-12);
  EXPECT_NEAR(rate.theta[1], -50.0 * s, 1e-12);
  const AdaptiveGains zero = sea::adaptation_rates(Eigen::Vector2d::Zero(), X, r, Phi, cfg);
  EXPECT_EQ(zero.pack().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Controller, ClfZeroAtIdealAndPositiveElsewhere) {
  const AdaptationConfig cfg = nominal_config();
  AdaptiveGains ideal;
  ideal.K_x = Eigen::Vector2d(-0.03, 0.47);
  ideal.K_r = 0.03;
  ideal.theta = Eigen::Vector2d(1.03, 0.0);
  EXPECT_EQ(sea::clf_value(Eigen::Vector2d::Zero(), ideal, ideal, cfg), 0.0);
  AdaptiveGains off = ideal;
  off.K_r += 0.1;
  EXPECT_NEAR(sea::clf_value(Eigen::Vector2d::Zero(), off, ideal, cfg), cfg.Lambda * 0.01 / 2000.0, 1e-15);
  const Eigen::Vector2d e(0.1, 0.2);
  EXPECT_NEAR(sea::clf_value(e, ideal, ideal, cfg), e.dot(cfg.P * e), 1e-15);
}

TEST(Controller, BacksteppingCancellation) {
  const AdaptationConfig cfg = nominal_config();
  EXPECT_LE(sea::backstepping_cancellation_error(PlantParams{}, cfg, 10000, 99), 1e-10);
}

TEST(Controller, PaperDriftLeavesZetaTerms) {
  const AdaptationConfig cfg = nominal_config();
  const PlantParams p;
  const sea::PlantState s{0.1, 0.5, 0.3, 2.0};
  const double phi_ddot = sea::limb_rhs(s, 0.0, p)[1];
  const double u_full = sea::backstep_ueq(s, phi_ddot, 0.2, 1.0, 3.0, cfg, p, false);
  const double u_lit = sea::backstep_ueq(s, phi_ddot, 0.2, 1.0, 3.0, cfg, p, true);
  const auto ge = sea::geometry_eval(s.x1, p.linkage);
  const double zeta_terms = -p.filter.zeta * (s.z2 * ge.G + s.z1 * ge.dG_dphi * s.x2);
  // u_eq = G (-f2 + ...), so the two variants differ by the zeta part of G f2
  EXPECT_NEAR(u_full - u_lit, -zeta_terms, 1e-12);
}

TEST(Controller, FirstStagePseudoControl) {
  const AdaptationConfig cfg = nominal_config();
  const Eigen::Vector2d e(0.02, -0.01);
  const double pb = e.dot(cfg.P * cfg.B);
  EXPECT_NEAR(sea::backstep_v1(e, 0.4, 0.3, 1.5, cfg), 1.5 - 2.0 * pb * cfg.Lambda - 30.0 * 0.1, 1e-12);
}

TEST(Controller, DerivativeEstimatorRamp) {
  const double dt = 0.01, tau = 0.1;
  sea::DerivativeEstimator est(dt, tau);
  const double alpha = dt / (tau + dt);
  EXPECT_DOUBLE_EQ(est.alpha(), alpha);
  EXPECT_EQ(est.update(0.0), 0.0);
  for (int k = 1; k <= 200; ++k) {
    const double y = est.update(2.5 * k * dt);
    EXPECT_NEAR(y, 2.5 * (1.0 - std::pow(1.0 - alpha, k)), 1e-12);
  }
}

TEST(Controller, DerivativeEstimatorFrequencyResponse) {
  const double dt = 0.01, tau = 0.1, w = 3.0;
  sea::DerivativeEstimator est(dt, tau);
  const double alpha = dt / (tau + dt);
  const std::complex<double> zinv = std::polar(1.0, -w * dt);
  const double gain = std::abs((1.0 - zinv) / dt * alpha / (1.0 - (1.0 - alpha) * zinv));
  double peak = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double y = est.update(std::sin(w * k * dt));
    if (k > 10000) peak = std::max(peak, std::abs(y));
  }
  EXPECT_NEAR(peak, gain, 2e-3 * gain);
}

TEST(Controller, DerivativeEstimatorRejectsBadTimes) {
  EXPECT_THROW(sea::DerivativeEstimator(0.0, 0.1), sea::ValidationError);
  EXPECT_THROW(sea::DerivativeEstimator(0.01, -1.0), sea::ValidationError);
}

TEST(Controller, CascadeStepEulerAdaptation) {
  const AdaptationConfig cfg = nominal_config();
  const PlantParams p;
  sea::CascadeController c(cfg, p, 0.01, 0.1);
  const sea::PlantState x{0.2, 0.0, 0.0, 0.0};
  const Eigen::Vector2d X_m = Eigen::Vector2d::Zero();
  const sea::CascadeCommand cmd = c.step(x, X_m, 0.0);
  const AdaptiveGains rate = sea::adaptation_rates(cmd.e, Eigen::Vector2d(0.2, 0.0), 0.0,
                                                   sea::regressor(Eigen::Vector2d(0.2, 0.0)), cfg);
  EXPECT_NEAR((c.gains().pack() - 0.01 * rate.pack()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(cmd.v_x, sea::control_vx(c.gains(), Eigen::Vector2d(0.2, 0.0), 0.0), 1e-15);
  EXPECT_EQ(cmd.v_x_dot, 0.0);
}

TEST(Controller, ValidateAdaptation) {
  AdaptationConfig cfg = nominal_config();
  EXPECT_NO_THROW(sea::validate(cfg));
  cfg.gamma_x(1, 1) = -50.0;
  EXPECT_THROW(sea::validate(cfg), sea::ValidationError);
  cfg = nominal_config();
  cfg.k2 = 0.0;
  EXPECT_THROW(sea::validate(cfg), sea::ValidationError);
}

}  // namespace
