#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace gsq {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

/// Matrix exponential (Pade scaling and squaring).
inline Mat expm(const Mat& a) { return a.exp(); }

inline double hermitian_defect(const Mat& a) {
  return (a - a.adjoint()).norm();
}

inline double unitarity_defect(const Mat& u) {
  return (u.adjoint() * u - Mat::Identity(u.cols(), u.cols())).norm();
}

/// exp(i t q) for Hermitian q, through its spectral decomposition.
inline Mat hermitian_exp_i(const Mat& q, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  const Vec phases = (I_unit * t * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Orthonormal columns spanning the range of a (tolerance on singular values).
inline Mat range_basis(const Mat& a, double tol = 1e-10) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  Eigen::Index k = 0;
  while (k < svd.singularValues().size() && svd.singularValues()(k) > tol) ++k;
  return svd.matrixU().leftCols(k);
}

/// Spectral-norm distance between the column spaces of two isometries.
inline double subspace_distance(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return 1.0;
  const Mat pa = a * a.adjoint();
  const Mat pb = b * b.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(pa - pb, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace gsq
