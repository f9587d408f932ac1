#pragma once

#include <complex>

#include <Eigen/Dense>

namespace incaapa {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Column-major stacking of a matrix into a vector.
CVector vec(const CMatrix& m);

/// Inverse of vec(). Throws RangeError when v.size() != rows * cols.
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product a ⊗ b.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// (m + mᴴ) / 2
CMatrix hermitian_part(const CMatrix& m);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const CMatrix& m);

/// ‖got − want‖_F / max(‖want‖_F, tiny).
double relative_error(const CMatrix& got, const CMatrix& want);

/// Hermitian positive-definite inverse through Cholesky. Throws SolveError if
/// the factorization fails.
CMatrix hpd_inverse(const CMatrix& m);

}  // namespace incaapa
