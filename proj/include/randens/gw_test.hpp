#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>
#include <string>

#include "randens/error.hpp"
#include "randens/linalg.hpp"

namespace randens {

enum class GwDirection {
  None,     ///< degenerate: both models have identical losses
  FavorsA,  ///< A has the smaller mean loss
  FavorsB,  ///< B has the smaller mean loss
};

struct GWTestResult {
  double statistic = 0.0;
  /// One-sided p-value for "B is more accurate than A". Small values favor B.
  double p_value = 1.0;
  double p_two_sided = 1.0;
  GwDirection direction = GwDirection::None;
  int dof = 2;
  std::size_t days = 0;
  bool degenerate = false;
  bool regularized = false;
};

/// Survival function of the chi-square distribution with 2 degrees of freedom.
inline double chi2_sf_dof2(double x) { return x <= 0.0 ? 1.0 : std::exp(-0.5 * x); }

/// Conditional predictive ability test on two day x hour loss matrices.
///
/// The loss differential of a day is the mean over hours of loss_A - loss_B.
/// Instruments are [1, d_t]; the statistic is T zbar' Omega^-1 zbar with
/// z_t = [1, d_t] d_{t+1} and Omega the uncentered second moment of z. A
/// singular Omega gets a ridge of 1e-12 times its largest eigenvalue.
inline GWTestResult gw_test(const Matrix& loss_a, const Matrix& loss_b) {
  if (loss_a.rows() != loss_b.rows() || loss_a.cols() != loss_b.cols())
    throw Error(ErrorCode::ShapeMismatch, "loss matrices have different shapes");
  if (loss_a.rows() < 10) throw Error(ErrorCode::InsufficientData, "the test needs at least 10 days");
  if (!loss_a.allFinite() || !loss_b.allFinite()) throw Error(ErrorCode::NonFinite, "losses must be finite");

  const Vector d = (loss_a - loss_b).rowwise().mean();
  GWTestResult r;
  r.days = static_cast<std::size_t>(d.size());
  if ((d.array() == 0.0).all()) {
    r.degenerate = true;
    return r;
  }

  const Eigen::Index T = d.size() - 1;
  Eigen::Vector2d zbar = Eigen::Vector2d::Zero();
  Eigen::Matrix2d omega = Eigen::Matrix2d::Zero();
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::Vector2d z(d(t + 1), d(t) * d(t + 1));
    zbar += z;
    omega += z * z.transpose();
  }
  zbar /= static_cast<double>(T);
  omega /= static_cast<double>(T);

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(omega);
  Eigen::Vector2d lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  if (!(lambda.minCoeff() > 1e-12 * lmax)) {
    lambda.array() += 1e-12 * (lmax > 0.0 ? lmax : 1.0);
    r.regularized = true;
  }
  const Eigen::Vector2d proj = eig.eigenvectors().transpose() * zbar;
  r.statistic = static_cast<double>(T) * (proj.array().square() / lambda.array()).sum();
  r.p_two_sided = chi2_sf_dof2(r.statistic);

  const double mean_d = d.mean();
  r.direction = mean_d > 0.0 ? GwDirection::FavorsB : mean_d < 0.0 ? GwDirection::FavorsA : GwDirection::None;
  r.p_value = mean_d > 0.0 ? r.p_two_sided / 2.0 : 1.0 - r.p_two_sided / 2.0;
  return r;
}

inline std::string to_string(GwDirection d) {
  switch (d) {
    case GwDirection::FavorsA: return "A";
    case GwDirection::FavorsB: return "B";
    case GwDirection::None: break;
  }
  return "none";
}

}  // namespace randens
