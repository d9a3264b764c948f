#ifndef OGTT_IDENTIFIABILITY_HPP
#define OGTT_IDENTIFIABILITY_HPP

// Similarity-transform argument for the single-stage model above basal glucose,
// states (X = G - Gb, I1, L1, V1) observed through X only.
//
// Two parameter sets with A(theta) T = T A(theta~) for a nonsingular T with
// first row e1 are indistinguishable from X. Such a T exists whenever
// theta~0 = theta0 and theta~1 = theta1, for any theta~3: theta3 is not
// identifiable, theta0 and theta1 are.
//
// The matrix identity says nothing about the fixed initial state used during
// inference, since T moves (X0, 0, 0, V0) off itself through T(2,4) != 0.

#include <Eigen/Dense>

#include "ogtt/error.hpp"

namespace ogtt {

using ReducedSystemMatrix = Eigen::Matrix4d;
using SimilarityTransform = Eigen::Matrix4d;

/// System matrix for X >= 0.
inline ReducedSystemMatrix reduced_matrix(double theta0, double theta1, double theta3, double lambda5,
                                          double lambda7) {
  ReducedSystemMatrix a;
  // clang-format off
  a <<    0.0,     -1.0,      1.0,  theta0,
       theta1,  -lambda5,     0.0,  theta3,
          0.0,      0.0, -lambda7,     0.0,
          0.0,      0.0,      0.0, -theta0;
  // clang-format on
  return a;
}

/// T(4,4) = (theta3~ + theta0 (theta0 - lambda5)) / (theta3 + theta0 (theta0 - lambda5)),
/// T(2,4) = theta0 (T(4,4) - 1), identity elsewhere.
inline SimilarityTransform build_transform(double theta3, double theta3_tilde, double theta0, double lambda5) {
  const double shift = theta0 * (theta0 - lambda5);
  const double denom = theta3 + shift;
  if (denom == 0.0) throw SingularTransform("theta3 + theta0 (theta0 - lambda5) is zero");
  const double t44 = (theta3_tilde + shift) / denom;
  if (t44 == 0.0) throw SingularTransform("T(4,4) is zero");
  SimilarityTransform t = SimilarityTransform::Identity();
  t(3, 3) = t44;
  t(1, 3) = theta0 * (t44 - 1.0);
  return t;
}

/// Max-norm of A T - T A~.
inline double verify_similarity(const ReducedSystemMatrix& a, const ReducedSystemMatrix& a_tilde,
                                const SimilarityTransform& t) {
  return (a * t - t * a_tilde).cwiseAbs().maxCoeff();
}

/// Smallest max-norm of A T - T A~ over all T whose first row is e1, by least squares
/// on the vectorized residual. A positive value means no such T exists.
inline double min_similarity_residual(const ReducedSystemMatrix& a, const ReducedSystemMatrix& a_tilde) {
  // vec(A T - T A~) = (I kron A - A~^T kron I) vec(T), column-major.
  Eigen::Matrix<double, 16, 16> m = Eigen::Matrix<double, 16, 16>::Zero();
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 4; ++r) {
      for (int k = 0; k < 4; ++k) {
        m(c * 4 + r, c * 4 + k) += a(r, k);        // (A T)(r, c) = sum_k A(r, k) T(k, c)
        m(c * 4 + r, k * 4 + r) -= a_tilde(k, c);  // (T A~)(r, c) = sum_k T(r, k) A~(k, c)
      }
    }
  }
  Eigen::Matrix<double, 16, 12> free;
  Eigen::Matrix<double, 16, 1> fixed = Eigen::Matrix<double, 16, 1>::Zero();
  int col = 0;
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 4; ++r) {
      if (r == 0) {
        if (c == 0) fixed += m.col(c * 4 + r);
      } else {
        free.col(col++) = m.col(c * 4 + r);
      }
    }
  }
  const Eigen::Matrix<double, 12, 1> x = free.colPivHouseholderQr().solve(-fixed);
  return (free * x + fixed).cwiseAbs().maxCoeff();
}

}  // namespace ogtt

#endif  // OGTT_IDENTIFIABILITY_HPP
