#pragma once

// Shared helpers for the test binaries: random complex draws and small
// brute-force oracles written independently of the library code paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "incaapa/linalg.hpp"
#include "incaapa/random.hpp"

namespace incaapa::testing {

inline CMatrix random_cmatrix(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols,
                              double variance = 1.0) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian(variance);
  }
  return m;
}

inline CVector random_cvector(Xoshiro256& rng, Eigen::Index n, double variance = 1.0) {
  return random_cmatrix(rng, n, 1, variance).col(0);
}

/// Random Hermitian positive definite matrix with eigenvalues bounded away
/// from zero.
inline CMatrix random_hpd(Xoshiro256& rng, Eigen::Index n) {
  const CMatrix a = random_cmatrix(rng, n, n);
  return a * a.adjoint() + 0.1 * CMatrix::Identity(n, n);
}

/// Kronecker product by its index definition.
inline CMatrix kron_oracle(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
    }
  }
  return out;
}

/// Column-major stacking by explicit loops.
inline CVector vec_oracle(const CMatrix& m) {
  CVector v(m.size());
  Eigen::Index p = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) v(p++) = m(i, j);
  }
  return v;
}

/// [X*; X] built row by row.
inline CMatrix augmented_oracle(const CMatrix& X) {
  CMatrix U(2 * X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      U(i, j) = std::conj(X(i, j));
      U(i + X.rows(), j) = X(i, j);
    }
  }
  return U;
}

/// Stationary second-order statistics of the widely linear ARMA
///   x(t) = a x(t−1) + c0 q(t) + c0c q*(t) + c1 q(t−1) + c1c q*(t−1)
/// by iterating the real 4-dimensional state covariance to a fixed point.
/// State s = [Re x, Im x, Re q_prev, Im q_prev].
struct ArmaStats {
  double variance = 0.0;          // E|x|²
  std::complex<double> pseudo;    // E[x²]
};

inline ArmaStats arma_stationary_stats(double a, double c0, double c0c, double c1,
                                       double c1c) {
  // q = u + jw with Var u = Var w = 1/2. Complex coefficient c on q and
  // conjugate coefficient cc on q* act on (u, w) as the real map
  // [[c + cc, 0], [0, c − cc]] for real c, cc.
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 2> Bq = Eigen::Matrix<double, 4, 2>::Zero();
  A(0, 0) = a;
  A(1, 1) = a;
  A(0, 2) = c1 + c1c;
  A(1, 3) = c1 - c1c;
  Bq(0, 0) = c0 + c0c;
  Bq(1, 1) = c0 - c0c;
  Bq(2, 0) = 1.0;
  Bq(3, 1) = 1.0;
  const Eigen::Matrix4d Q = 0.5 * Bq * Bq.transpose();
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
  for (int it = 0; it < 2000; ++it) P = A * P * A.transpose() + Q;
  ArmaStats s;
  s.variance = P(0, 0) + P(1, 1);
  s.pseudo = {P(0, 0) - P(1, 1), 2.0 * P(0, 1)};
  return s;
}

}  // namespace incaapa::testing
