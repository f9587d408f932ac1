#include "incaapa/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "incaapa/errors.hpp"

namespace incaapa {

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw RangeError("unvec: vector of length " + std::to_string(v.size()) +
                     " cannot be reshaped to " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const Eigen::Index br = b.rows();
  const Eigen::Index bc = b.cols();
  CMatrix out(a.rows() * br, a.cols() * bc);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix hermitian_part(const CMatrix& m) {
  return (m + m.adjoint()) / 2.0;
}

double spectral_radius(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double relative_error(const CMatrix& got, const CMatrix& want) {
  const double denom =
      std::max(want.norm(), std::numeric_limits<double>::min());
  return (got - want).norm() / denom;
}

CMatrix hpd_inverse(const CMatrix& m) {
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SolveError("matrix is not Hermitian positive definite");
  }
  return llt.solve(CMatrix::Identity(m.rows(), m.cols()));
}

}  // namespace incaapa
