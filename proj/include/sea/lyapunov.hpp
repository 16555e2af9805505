#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "sea/errors.hpp"

namespace sea {

/// Both eigenvalues of a real 2x2 matrix in the open left half-plane.
inline bool is_hurwitz(const Eigen::Matrix2d& A) {
  return A.trace() < 0.0 && A.determinant() > 0.0;
}

/// Symmetric positive definite by the leading-principal-minor test.
inline bool is_spd(const Eigen::Matrix2d& M, double sym_tol = 1e-12) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (std::abs(M(0, 1) - M(1, 0)) > sym_tol * scale) return false;
  return M(0, 0) > 0.0 && M.determinant() > 0.0;
}

/// max |P A + A^T P + Q|
inline double lyapunov_residual(const Eigen::Matrix2d& A, const Eigen::Matrix2d& Q,
                                const Eigen::Matrix2d& P) {
  return (P * A + A.transpose() * P + Q).cwiseAbs().maxCoeff();
}

/// The Q a given P certifies for A, i.e. -(P A + A^T P).
inline Eigen::Matrix2d implied_q(const Eigen::Matrix2d& A, const Eigen::Matrix2d& P) {
  return -(P * A + A.transpose() * P);
}

// Solves P A + A^T P = -Q for symmetric P. The three independent entries
// (p11, p12, p22) satisfy a 3x3 linear system read off entries (1,1), (1,2), (2,2).
inline Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& A, const Eigen::Matrix2d& Q) {
  if (!is_hurwitz(A)) throw NotHurwitz("A_m has an eigenvalue with non-negative real part");
  if (!is_spd(Q)) throw ValidationError("Q must be symmetric positive definite");

  Eigen::Matrix3d M;
  // clang-format off
  M << 2.0 * A(0, 0), 2.0 * A(1, 0),           0.0,
       A(0, 1),       A(0, 0) + A(1, 1),       A(1, 0),
       0.0,           2.0 * A(0, 1),           2.0 * A(1, 1);
  // clang-format on
  const Eigen::Vector3d rhs(-Q(0, 0), -0.5 * (Q(0, 1) + Q(1, 0)), -Q(1, 1));
  Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
  if (!lu.isInvertible()) throw SolveSingular("Lyapunov system is singular");
  const Eigen::Vector3d p = lu.solve(rhs);

  Eigen::Matrix2d P;
  P << p[0], p[1], p[1], p[2];
  return P;
}

}  // namespace sea
