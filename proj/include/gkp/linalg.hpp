#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "gkp/errors.hpp"

namespace gkp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;
inline const double kSqrtPi = std::sqrt(std::numbers::pi);

// Symplectic form for quadrature ordering (q_1..q_n, p_1..p_n).
inline Mat omega(int n_modes) {
  Mat w = Mat::Zero(2 * n_modes, 2 * n_modes);
  w.topRightCorner(n_modes, n_modes).setIdentity();
  w.bottomLeftCorner(n_modes, n_modes) = -Mat::Identity(n_modes, n_modes);
  return w;
}

// Places a single-mode (q, p) matrix on mode k of an n-mode identity.
inline Mat embed_mode(const Mat2& m, int n_modes, int k) {
  Mat out = Mat::Identity(2 * n_modes, 2 * n_modes);
  const int idx[2] = {k, n_modes + k};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out(idx[i], idx[j]) = m(i, j);
  }
  return out;
}

// Block-diagonal direct sum of single-mode matrices in the interleaved ordering.
inline Mat direct_sum_modes(const std::vector<Mat2>& blocks) {
  const int n = static_cast<int>(blocks.size());
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    const int idx[2] = {k, n + k};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) out(idx[i], idx[j]) = blocks[k](i, j);
    }
  }
  return out;
}

inline bool is_symplectic(const Mat& s, double tol = 1e-10) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) return false;
  const Mat w = omega(static_cast<int>(s.rows() / 2));
  return (s.transpose() * w * s - w).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_symmetric(const Mat& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool is_positive_definite(const Mat& m) {
  if (!is_symmetric(m)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff() > 0.0;
}

// Symmetric positive semidefinite square root; tiny negative eigenvalues are clipped.
inline Mat sym_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Mat2 rotation2(double theta) {
  Mat2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace gkp
