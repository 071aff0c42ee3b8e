#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>

#include "randens/error.hpp"

namespace randens {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Singular values at or below this are treated as zero:
/// max(rows, cols) * eps * sigma_max.
inline double pinv_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

/// Moore-Penrose pseudoinverse via thin SVD.
inline Matrix pseudoinverse(const Matrix& A) {
  if (!A.allFinite()) throw Error(ErrorCode::NonFinite, "pseudoinverse of a non-finite matrix");
  if (A.size() == 0) return Matrix::Zero(A.cols(), A.rows());
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = pinv_cutoff(A.rows(), A.cols(), s.size() ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Minimum-norm least-squares solution of H * beta = Y (beta = H^+ Y).
inline Matrix min_norm_solve(const Matrix& H, const Matrix& Y) {
  if (H.rows() != Y.rows())
    throw Error(ErrorCode::DimensionMismatch, "H and Y must have the same number of rows");
  if (!H.allFinite() || !Y.allFinite())
    throw Error(ErrorCode::NonFinite, "least-squares inputs contain non-finite values");
  if (H.size() == 0) return Matrix::Zero(H.cols(), Y.cols());
  Eigen::BDCSVD<Matrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = pinv_cutoff(H.rows(), H.cols(), s(0));
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  Matrix beta = svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * Y));
  if (!beta.allFinite()) throw Error(ErrorCode::NonFinite, "least-squares solution is not finite");
  return beta;
}

}  // namespace randens
