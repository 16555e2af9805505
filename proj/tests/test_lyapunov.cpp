#include <gtest/gtest.h>

#include <random>

#include "sea/lyapunov.hpp"

namespace {

const Eigen::Matrix2d kAm = (Eigen::Matrix2d() << 0.0, 1.0, -6.0, -4.0).finished();

TEST(Lyapunov, HandSolutionForIdentity) {
  // Entry (1,1): -12 p12 = -1; (1,2): p11 - 4 p12 - 6 p22 = 0; (2,2): 2 p12 - 8 p22 = -1
  const Eigen::Matrix2d P = sea::solve_lyapunov(kAm, Eigen::Matrix2d::Identity());
  EXPECT_NEAR(P(0, 0), 29.0 / 24.0, 1e-12);
  EXPECT_NEAR(P(0, 1), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(P(1, 0), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(P(1, 1), 7.0 / 48.0, 1e-12);
  EXPECT_LE(sea::lyapunov_residual(kAm, Eigen::Matrix2d::Identity(), P), 1e-12);
}

TEST(Lyapunov, DiagonalWeightReproducesPrintedCoupling) {
  const Eigen::Matrix2d Q = Eigen::Vector2d(3.0, 1.0).asDiagonal();
  const Eigen::Matrix2d P = sea::solve_lyapunov(kAm, Q);
  EXPECT_NEAR(P(0, 0), 2.125, 1e-12);
  EXPECT_NEAR(P(0, 1), 0.25, 1e-12);
  EXPECT_NEAR(P(1, 1), 0.1875, 1e-12);
}

TEST(Lyapunov, PrintedMatrixImpliesIndefiniteWeight) {
  Eigen::Matrix2d P;
  P << 3.0 / 8.0, 1.0 / 4.0, 1.0 / 4.0, 3.0 / 16.0;
  const Eigen::Matrix2d Q = sea::implied_q(kAm, P);
  EXPECT_NEAR(Q(0, 0), 3.0, 1e-15);
  EXPECT_NEAR(Q(0, 1), 1.75, 1e-15);
  EXPECT_NEAR(Q(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(Q.determinant(), -0.0625, 1e-14);
  EXPECT_FALSE(sea::is_spd(Q));
}

TEST(Lyapunov, RandomStableSystems) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int solved = 0;
  while (solved < 200) {
    Eigen::Matrix2d A;
    A << u(rng), u(rng), u(rng), u(rng);
    if (!sea::is_hurwitz(A)) continue;
    Eigen::Matrix2d L;
    L << 1.0 + std::abs(u(rng)), 0.0, u(rng), 1.0 + std::abs(u(rng));
    const Eigen::Matrix2d Q = L * L.transpose();
    const Eigen::Matrix2d P = sea::solve_lyapunov(A, Q);
    EXPECT_LE(sea::lyapunov_residual(A, Q, P), 1e-9 * std::max(1.0, P.cwiseAbs().maxCoeff()));
    EXPECT_TRUE(sea::is_spd(P));
    ++solved;
  }
}

TEST(Lyapunov, Errors) {
  Eigen::Matrix2d unstable;
  unstable << 0.0, 1.0, 6.0, -4.0;
  EXPECT_THROW(sea::solve_lyapunov(unstable, Eigen::Matrix2d::Identity()), sea::NotHurwitz);
  Eigen::Matrix2d bad_q;
  bad_q << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(sea::solve_lyapunov(kAm, bad_q), sea::ValidationError);
  Eigen::Matrix2d asym;
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_FALSE(sea::is_spd(asym));
}

TEST(Lyapunov, HurwitzTest) {
  EXPECT_TRUE(sea::is_hurwitz(kAm));
  Eigen::Matrix2d marginal;
  marginal << 0.0, 1.0, -1.0, 0.0;
  EXPECT_FALSE(sea::is_hurwitz(marginal));
}

}  // namespace
