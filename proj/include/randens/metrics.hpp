#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "randens/error.hpp"
#include "randens/linalg.hpp"

namespace randens {

/// Forecast quality summary. Percentages use PE = 100 (actual - forecast) / actual,
/// so a positive MPE means underprediction.
struct MetricsReport {
  double mape = 0.0;
  double median_ape = 0.0;
  double rmse = 0.0;
  double mpe = 0.0;
  double std_pe = 0.0;  ///< population standard deviation of PE
  std::size_t n_days = 0;
  std::size_t n_points = 0;
};

namespace detail {

inline void check_aligned(const Matrix& actuals, const Matrix& forecasts) {
  if (actuals.rows() != forecasts.rows() || actuals.cols() != forecasts.cols())
    throw Error(ErrorCode::ShapeMismatch, "actuals and forecasts have different shapes");
  if (!actuals.allFinite() || !forecasts.allFinite())
    throw Error(ErrorCode::NonFinite, "actuals or forecasts contain non-finite values");
  for (Eigen::Index i = 0; i < actuals.size(); ++i)
    if (actuals.data()[i] == 0.0) throw Error(ErrorCode::ZeroActual, "percentage errors need non-zero actuals");
}

/// Linear-interpolation quantile of a sorted sample, q in [0, 1].
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline Matrix percentage_errors(const Matrix& actuals, const Matrix& forecasts) {
  detail::check_aligned(actuals, forecasts);
  return (100.0 * (actuals - forecasts).array() / actuals.array()).matrix();
}

inline MetricsReport compute_metrics(const Matrix& actuals, const Matrix& forecasts) {
  const Matrix pe = percentage_errors(actuals, forecasts);
  MetricsReport r;
  r.n_days = static_cast<std::size_t>(actuals.rows());
  r.n_points = static_cast<std::size_t>(actuals.size());
  if (r.n_points == 0) return r;
  const double count = static_cast<double>(r.n_points);
  r.mape = pe.cwiseAbs().sum() / count;
  r.mpe = pe.sum() / count;
  r.std_pe = std::sqrt((pe.array() - r.mpe).square().sum() / count);
  r.rmse = std::sqrt((actuals - forecasts).squaredNorm() / count);
  std::vector<double> ape(pe.data(), pe.data() + pe.size());
  for (double& v : ape) v = std::abs(v);
  std::sort(ape.begin(), ape.end());
  r.median_ape = detail::sorted_quantile(ape, 0.5);
  return r;
}

struct ApeDistribution {
  std::vector<double> sorted_ape;
  static constexpr std::array<double, 5> levels{5, 25, 50, 75, 95};
  std::array<double, 5> quantiles{};
};

inline ApeDistribution ape_distribution(const Matrix& actuals, const Matrix& forecasts) {
  const Matrix pe = percentage_errors(actuals, forecasts);
  ApeDistribution d;
  d.sorted_ape.assign(pe.data(), pe.data() + pe.size());
  for (double& v : d.sorted_ape) v = std::abs(v);
  std::sort(d.sorted_ape.begin(), d.sorted_ape.end());
  for (std::size_t k = 0; k < d.levels.size(); ++k)
    d.quantiles[k] = detail::sorted_quantile(d.sorted_ape, d.levels[k] / 100.0);
  return d;
}

/// Mean absolute percentage error, used for quick per-member comparisons.
inline double mape(const Matrix& actuals, const Matrix& forecasts) {
  return percentage_errors(actuals, forecasts).cwiseAbs().mean();
}

}  // namespace randens
