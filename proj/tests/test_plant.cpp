#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sea/integrator.hpp"
#include "sea/plant.hpp"

namespace {

using sea::MotorParams;
using sea::PlantParams;
using sea::PlantState;

TEST(Plant, EquivalentInertiaLimit) {
  MotorParams mp;
  mp.J_s = 0.0;
  mp.m0 = 0.0;
  EXPECT_EQ(sea::equivalent_inertia(mp), mp.J_M);
}

TEST(Plant, EquivalentInertiaIdentifiedValue) {
  // identified J_eq = 1.574e-4 against J_M = 1.57e-4
  EXPECT_NEAR(sea::equivalent_inertia(MotorParams{}) - MotorParams{}.J_M, 0.004e-4, 1e-9);
}

TEST(Plant, EquivalentInertiaTermByTerm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 200; ++i) {
    MotorParams mp;
    mp.J_M = 1e-4 * u(rng);
    mp.J_s = 1e-6 * u(rng);
    mp.m0 = u(rng);
    mp.n = 1.0 + 4.0 * u(rng);
    mp.lead = 5e-3 * u(rng);
    mp.eta1 = 0.45 * u(rng);
    mp.eta2 = 0.45 * u(rng);
    const double screw = mp.J_s / (mp.n * mp.n * mp.eta1);
    const double nut = mp.m0 * std::pow(mp.lead / (2.0 * std::numbers::pi * mp.n), 2) / (mp.eta1 * mp.eta2);
    const double want = mp.J_M + screw + nut;
    EXPECT_NEAR(sea::equivalent_inertia(mp), want, 1e-15 * want);
  }
}

TEST(Plant, DefaultMotorReproducesIdentifiedCoefficients) {
  const auto c = sea::drive_coefficients(MotorParams{});
  EXPECT_NEAR(c.a1, 5.68, 1e-5);
  EXPECT_NEAR(c.a0, 270.0, 1e-3);
  EXPECT_NEAR(270.0 / 5.68, 47.5352, 1e-4);
  const auto fc = sea::sea_filter_constants(MotorParams{}, 20000.0, 2.0, 1.0);
  EXPECT_NEAR(fc.zeta, 47.535, 1e-3);
}

TEST(Plant, ZetaOverrideAndOmega) {
  const auto fc = sea::sea_filter_constants(MotorParams{}, 20000.0, 2.0, 1.0, 47.535);
  EXPECT_EQ(fc.zeta, 47.535);
  EXPECT_NEAR(fc.omega, 100.0, 1e-12);
  EXPECT_EQ(fc.mass_ratio, 1.0);
}

TEST(Plant, ZetaLimitWithoutInductanceAndFriction) {
  MotorParams mp;
  mp.L_ind = 0.0;
  mp.B_M = 0.0;
  const auto fc = sea::sea_filter_constants(mp, 20000.0, 2.0, 1.0);
  EXPECT_NEAR(fc.zeta, mp.K_EMF * mp.K_T / (mp.R * sea::equivalent_inertia(mp)), 1e-12);
}

TEST(Plant, LimbEquilibriumAndGravity) {
  const PlantParams p;
  const Eigen::Vector2d eq = sea::limb_rhs({0.0, 0.0, 0.0, 0.0}, 0.0, p);
  EXPECT_EQ(eq[0], 0.0);
  EXPECT_EQ(eq[1], 0.0);
  const Eigen::Vector2d d = sea::limb_rhs({0.2, 0.0, 0.0, 0.0}, 0.0, p);
  EXPECT_NEAR(d[1], -(9.81 / 0.0525) * std::sin(0.2), 1e-12);
  EXPECT_NEAR(d[1], -37.1227, 5e-4);
  EXPECT_NEAR(p.lambda(), 181.406, 5e-4);
}

TEST(Plant, LimbTorqueInputs) {
  const PlantParams p;
  const PlantState s{0.1, 0.7, 0.3, 0.0};
  const double tau_D = 0.05;
  const double lam = 1.0 / (2.0 * 0.0525 * 0.0525);
  const double want = -0.5 * lam * 0.7 - (9.81 / 0.0525) * std::sin(0.1) + lam * tau_D + lam * 0.3;
  EXPECT_NEAR(sea::limb_rhs(s, tau_D, p)[1], want, 1e-10);
  EXPECT_EQ(sea::limb_rhs(s, tau_D, p)[0], 0.7);
}

TEST(Plant, GravityBalanceHoldsTorqueRate) {
  const PlantParams p;
  const PlantState s{0.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(sea::sea_rhs(s, 0.0, 0.0, p)[1], 0.0);
  const PlantState tilted{0.3, 0.0, 0.0, 0.0};
  const auto ge = sea::geometry_eval(0.3, p.linkage);
  const double gravity = 9.81 * 0.0525 * std::sin(0.3) / (p.linkage.d6 * ge.sin_gamma);
  EXPECT_NEAR(sea::sea_rhs(tilted, 0.0, gravity, p)[1], 0.0, 1e-9);
}

TEST(Plant, UnitMassRatioGravityTerm) {
  PlantParams p;
  const PlantState s{0.25, 0.0, 0.0, 0.0};
  const auto ge = sea::geometry_eval(0.25, p.linkage);
  const double z2_dot = sea::sea_rhs(s, 0.0, 0.0, p)[1];
  EXPECT_NEAR(z2_dot * ge.G, -9.81 * 0.0525 * std::sin(0.25) / (p.linkage.d6 * ge.sin_gamma), 1e-12);
  p.filter.mass_ratio = 2.0;
  EXPECT_NEAR(sea::sea_rhs(s, 0.0, 0.0, p)[1], 2.0 * z2_dot, 1e-9 * std::abs(z2_dot));
}

// With phi frozen, Delta = tau G obeys Delta'' + zeta Delta' + w^2 Delta = u - F_R / m.
TEST(Plant, FrozenAngleMatchesDeflectionForm) {
  PlantParams p;
  const double phi = 0.15;
  const double u = 0.02;
  const auto ge = sea::geometry_eval(phi, p.linkage);
  const double forcing = u - p.filter.mass_ratio * 9.81 * 0.0525 * std::sin(phi) / (p.linkage.d6 * ge.sin_gamma);
  const double zeta = p.filter.zeta, w2 = p.filter.omega * p.filter.omega;

  auto torque_rhs = [&](double, const Eigen::Vector2d& z) -> Eigen::Vector2d {
    return sea::sea_rhs({phi, 0.0, z[0], z[1]}, 0.0, u, p);
  };
  auto deflection_rhs = [&](double, const Eigen::Vector2d& d) -> Eigen::Vector2d {
    return {d[1], -zeta * d[1] - w2 * d[0] + forcing};
  };
  Eigen::Vector2d z(0.4, -2.0);
  Eigen::Vector2d d = z * ge.G;
  const double h = 1e-4;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    z = sea::rk4_step(torque_rhs, z, i * h, h);
    d = sea::rk4_step(deflection_rhs, d, i * h, h);
    worst = std::max(worst, std::abs(z[0] - d[0] / ge.G));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Plant, RhsFiniteOverOperatingRange) {
  const PlantParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> phi(-0.6, 0.6), rate(-5.0, 5.0), tau(-20.0, 20.0),
      tau_rate(-500.0, 500.0), u(-1.0, 1.0);
  const sea::DisturbanceProfile dist{sea::DisturbanceProfile::Kind::sinusoid, 0.1, 0.5, 0.0, {}};
  for (int i = 0; i < 10000; ++i) {
    const PlantState s{phi(rng), rate(rng), tau(rng), tau_rate(rng)};
    EXPECT_TRUE(sea::coupled_rhs(0.01 * i, s, u(rng), dist, p).allFinite());
  }
}

TEST(Plant, CoupledRhsComposes) {
  const PlantParams p;
  const PlantState s{0.2, 0.4, 0.1, -0.3};
  const sea::DisturbanceProfile dist{sea::DisturbanceProfile::Kind::constant, 0.07, 0.0, 0.0, {}};
  const Eigen::Vector4d d = sea::coupled_rhs(0.0, s, 0.01, dist, p);
  const Eigen::Vector2d limb = sea::limb_rhs(s, 0.07, p);
  const Eigen::Vector2d sea_part = sea::sea_rhs(s, limb[1], 0.01, p);
  EXPECT_EQ(d[0], limb[0]);
  EXPECT_EQ(d[1], limb[1]);
  EXPECT_EQ(d[2], sea_part[0]);
  EXPECT_EQ(d[3], sea_part[1]);
}

TEST(Plant, DisturbanceProfiles) {
  using K = sea::DisturbanceProfile::Kind;
  EXPECT_EQ((sea::DisturbanceProfile{})(3.0), 0.0);
  EXPECT_EQ((sea::DisturbanceProfile{K::constant, 0.2, 0.0, 0.0, {}})(5.0), 0.2);
  EXPECT_NEAR((sea::DisturbanceProfile{K::sinusoid, 0.3, 0.5, 0.0, {}})(0.5), 0.3, 1e-15);
  const sea::DisturbanceProfile pw{K::piecewise, 0.0, 0.0, 0.0, {{1.0, 0.1}, {2.0, -0.2}}};
  EXPECT_EQ(pw(0.5), 0.0);
  EXPECT_EQ(pw(1.0), 0.1);
  EXPECT_EQ(pw(1.5), 0.1);
  EXPECT_EQ(pw(9.0), -0.2);
}

TEST(Plant, VoltageVanishesWhenLoadAndVirtualInputCancel) {
  const MotorParams mp;
  const sea::SeaFilterConstants fc;
  const double x_c_dot = 0.013;
  const std::array<double, 2> f_l{0.0, 0.0};
  EXPECT_NEAR(sea::virtual_to_voltage(fc.zeta * x_c_dot, x_c_dot, f_l, 0.01, mp, fc), 0.0, 1e-15);
}

TEST(Plant, VoltageConstantLoadHasNoRateTerm) {
  const MotorParams mp;
  const sea::SeaFilterConstants fc;
  const std::array<double, 3> f_l{40.0, 40.0, 40.0};
  const double T_L = mp.lead * 40.0 / (2.0 * std::numbers::pi * mp.n * mp.eta1 * mp.eta2);
  const double a1 = sea::drive_coefficients(mp).a1;
  const double want = a1 * (fc.zeta * 0.01 - 0.2) + mp.R * T_L / mp.K_T;
  EXPECT_NEAR(sea::virtual_to_voltage(0.2, 0.01, f_l, 0.01, mp, fc), want, 1e-12);
}

TEST(Plant, VoltageRampLoad) {
  const MotorParams mp;
  const sea::SeaFilterConstants fc;
  const double dt = 0.01;
  const std::vector<double> f_l{10.0, 12.0, 14.0};  // ramp of 200 N/s
  const double c = mp.lead / (2.0 * std::numbers::pi * mp.n * mp.eta1 * mp.eta2);
  const double T_L = c * 14.0;
  const double T_L_dot = c * 200.0;
  const double a1 = sea::drive_coefficients(mp).a1;
  const double want = a1 * (fc.zeta * -0.02 - 0.5) + (mp.R * T_L - mp.L_ind * T_L_dot) / mp.K_T;
  EXPECT_NEAR(sea::virtual_to_voltage(0.5, -0.02, f_l, dt, mp, fc), want, 1e-9);
}

TEST(Plant, VoltageNeedsTwoSamples) {
  const std::array<double, 1> one{1.0};
  EXPECT_THROW(sea::virtual_to_voltage(0.0, 0.0, one, 0.01, MotorParams{}, {}), sea::InsufficientTrace);
}

TEST(Plant, MotorValidation) {
  EXPECT_NO_THROW(sea::validate(MotorParams{}));
  MotorParams mp;
  mp.R = 0.0;
  EXPECT_THROW(sea::validate(mp), sea::ValidationError);
  mp = MotorParams{};
  mp.eta1 = 1.2;
  EXPECT_THROW(sea::validate(mp), sea::ValidationError);
}

}  // namespace
