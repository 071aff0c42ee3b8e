#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randens/error.hpp"
#include "randens/linalg.hpp"
#include "randens/patterns.hpp"
#include "randens/random.hpp"

namespace randens {

/// Hyperparameters of one randomized network.
struct RandNNConfig {
  std::size_t m = 40;        ///< hidden nodes
  double alpha_max = 70.0;   ///< upper bound of sigmoid slope angles, degrees
  std::uint64_t seed = 0;

  void validate() const {
    if (m < 1) throw Error(ErrorCode::InvalidParameter, "m must be >= 1");
    if (!(alpha_max > 0.0 && alpha_max < 90.0))
      throw Error(ErrorCode::InvalidAngle, "alpha_max must lie in (0, 90) degrees, got " + std::to_string(alpha_max));
  }
};

/// Bound u of the hidden-weight interval [-u, u] for a slope-angle bound in degrees.
inline double weight_bound(double alpha_max_deg) {
  if (!(alpha_max_deg > 0.0 && alpha_max_deg < 90.0))
    throw Error(ErrorCode::InvalidAngle, "alpha_max must lie in (0, 90) degrees");
  return 4.0 * std::tan(alpha_max_deg * std::numbers::pi / 180.0);
}

/// Hidden weights (row j is node j's weight vector), biases, and the index
/// of each node's anchor pattern in the pool it was drawn from.
struct HiddenLayer {
  Matrix weights;
  Vector biases;
  std::vector<std::size_t> anchors;

  std::size_t nodes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

struct RandNNModel {
  Matrix hidden_weights;   ///< m x n'
  Vector hidden_biases;    ///< m
  Matrix output_weights;   ///< m x n
  RandNNConfig config;
  /// Input features the model sees, over the full pattern length. Absent
  /// means all features.
  std::optional<std::vector<bool>> feature_mask;

  std::size_t hidden_nodes() const noexcept { return static_cast<std::size_t>(hidden_weights.rows()); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(hidden_weights.cols()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(output_weights.cols()); }
};

// ---------------------------------------------------------------------------
// Pattern matrices

inline Matrix input_matrix(const TrainingSet& phi) {
  Matrix X(static_cast<Eigen::Index>(phi.size()), static_cast<Eigen::Index>(phi.n));
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t t = 0; t < phi.n; ++t) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = phi.pairs[i].input.x[t];
  return X;
}

inline Matrix output_matrix(const TrainingSet& phi) {
  Matrix Y(static_cast<Eigen::Index>(phi.size()), static_cast<Eigen::Index>(phi.n));
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t t = 0; t < phi.n; ++t) Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = phi.pairs[i].output.y[t];
  return Y;
}

inline Matrix select_columns(const Matrix& A, std::span<const std::size_t> cols) {
  Matrix out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = A.col(static_cast<Eigen::Index>(cols[c]));
  return out;
}

inline Matrix select_rows(const Matrix& A, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = A.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

inline std::vector<std::size_t> active_features(const std::vector<bool>& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < mask.size(); ++t)
    if (mask[t]) idx.push_back(t);
  return idx;
}

// ---------------------------------------------------------------------------
// Three learning steps

/// Biases that put each node's sigmoid inflection point on its anchor pattern.
inline Vector anchored_biases(const Matrix& weights, const Matrix& x_pool,
                              std::span<const std::size_t> anchors) {
  Vector b(weights.rows());
  for (Eigen::Index j = 0; j < weights.rows(); ++j)
    b(j) = -weights.row(j).dot(x_pool.row(static_cast<Eigen::Index>(anchors[static_cast<std::size_t>(j)])));
  return b;
}

/// Step 1. Draws all m*n weights uniformly on [-u, u] (node by node), then
/// one anchor per node uniformly with replacement from the pool rows.
inline HiddenLayer generate_hidden_params(std::size_t n, const RandNNConfig& config,
                                          const Matrix& x_pool, Rng& rng) {
  config.validate();
  if (x_pool.rows() == 0) throw Error(ErrorCode::EmptyPool, "anchor pool is empty");
  if (static_cast<std::size_t>(x_pool.cols()) != n)
    throw Error(ErrorCode::DimensionMismatch, "anchor pool width differs from n");
  const double u = weight_bound(config.alpha_max);
  const auto m = static_cast<Eigen::Index>(config.m);
  HiddenLayer layer;
  layer.weights.resize(m, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(n); ++t) layer.weights(j, t) = rng.uniform(-u, u);
  layer.anchors.resize(config.m);
  for (auto& a : layer.anchors) a = rng.below(static_cast<std::size_t>(x_pool.rows()));
  layer.biases = anchored_biases(layer.weights, x_pool, layer.anchors);
  return layer;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Step 2. H(i, j) = sigmoid(a_j . x_i + b_j).
inline Matrix hidden_output(const Matrix& weights, const Vector& biases, const Matrix& X) {
  if (X.cols() != weights.cols() || biases.size() != weights.rows())
    throw Error(ErrorCode::DimensionMismatch, "hidden layer and inputs are not conformant");
  Matrix H = X * weights.transpose();
  H.rowwise() += biases.transpose();
  return H.unaryExpr([](double z) { return sigmoid(z); });
}

/// Step 3. beta = H^+ Y.
inline Matrix fit_output_weights(const Matrix& H, const Matrix& Y) { return min_norm_solve(H, Y); }

inline RandNNModel fit_with_hidden(const Matrix& weights, const Vector& biases, const Matrix& X,
                                   const Matrix& Y, const RandNNConfig& config) {
  RandNNModel model;
  model.hidden_weights = weights;
  model.hidden_biases = biases;
  model.output_weights = fit_output_weights(hidden_output(weights, biases, X), Y);
  model.config = config;
  return model;
}

inline RandNNModel train(const Matrix& X, const Matrix& Y, const RandNNConfig& config) {
  if (X.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training patterns");
  Rng rng(config.seed);
  const HiddenLayer hidden = generate_hidden_params(static_cast<std::size_t>(X.cols()), config, X, rng);
  return fit_with_hidden(hidden.weights, hidden.biases, X, Y, config);
}

inline RandNNModel train(const TrainingSet& phi, const RandNNConfig& config) {
  if (phi.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training patterns");
  return train(input_matrix(phi), output_matrix(phi), config);
}

// ---------------------------------------------------------------------------
// Prediction

/// Predicts output patterns for the rows of X (already restricted to the
/// model's active features).
inline Matrix predict(const RandNNModel& model, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(X.cols()) +
                                                  " features, model expects " + std::to_string(model.input_dim()));
  return hidden_output(model.hidden_weights, model.hidden_biases, X) * model.output_weights;
}

inline std::vector<double> predict(const RandNNModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " features, model expects " + std::to_string(model.input_dim()));
  const Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::RowVectorXd y = predict(model, Matrix(row));
  return {y.data(), y.data() + y.size()};
}

inline OutputPattern predict(const RandNNModel& model, const InputPattern& x) {
  return OutputPattern{predict(model, std::span<const double>(x.x)), x.source_index, 1};
}

/// Predicts from a full-length pattern, applying the model's feature mask.
inline std::vector<double> predict_full(const RandNNModel& model, std::span<const double> x_full) {
  if (!model.feature_mask) return predict(model, x_full);
  const auto& mask = *model.feature_mask;
  if (mask.size() != x_full.size())
    throw Error(ErrorCode::DimensionMismatch, "pattern length differs from the feature mask");
  std::vector<double> x;
  x.reserve(model.input_dim());
  for (std::size_t t = 0; t < mask.size(); ++t)
    if (mask[t]) x.push_back(x_full[t]);
  return predict(model, std::span<const double>(x));
}

// ---------------------------------------------------------------------------
// Hyperparameter selection

struct GridCell {
  std::size_t m = 0;
  double alpha_max = 0.0;
  double mae = 0.0;  ///< mean validation MAE in pattern space across folds
};

struct GridSearchResult {
  std::size_t m = 0;
  double alpha_max = 0.0;
  std::vector<GridCell> cells;  ///< ordered by (m, alpha_max)
};

/// Grid search with k-fold cross-validation on contiguous temporal blocks.
/// Every cell is trained with the same seed; ties go to the smaller m, then
/// the smaller alpha_max.
inline GridSearchResult grid_search_cv(const TrainingSet& phi, std::vector<std::size_t> m_grid,
                                       std::vector<double> alpha_grid, std::size_t folds,
                                       std::uint64_t seed = 0) {
  if (m_grid.empty() || alpha_grid.empty()) throw Error(ErrorCode::EmptyGrid, "hyperparameter grid is empty");
  if (folds < 2) throw Error(ErrorCode::InvalidParameter, "need at least 2 folds");
  if (phi.size() < folds)
    throw Error(ErrorCode::InsufficientData,
                std::to_string(phi.size()) + " pairs cannot fill " + std::to_string(folds) + " folds");
  std::sort(m_grid.begin(), m_grid.end());
  std::sort(alpha_grid.begin(), alpha_grid.end());
  const Matrix X = input_matrix(phi);
  const Matrix Y = output_matrix(phi);
  const std::size_t N = phi.size();

  std::vector<std::vector<std::size_t>> train_idx(folds), val_idx(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * N / folds, hi = (f + 1) * N / folds;
    for (std::size_t i = 0; i < N; ++i) (i >= lo && i < hi ? val_idx[f] : train_idx[f]).push_back(i);
  }

  GridSearchResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m : m_grid) {
    for (double alpha : alpha_grid) {
      const RandNNConfig cfg{m, alpha, seed};
      cfg.validate();
      double total = 0.0;
      for (std::size_t f = 0; f < folds; ++f) {
        const RandNNModel model = train(select_rows(X, train_idx[f]), select_rows(Y, train_idx[f]), cfg);
        const Matrix err = predict(model, select_rows(X, val_idx[f])) - select_rows(Y, val_idx[f]);
        total += err.cwiseAbs().mean();
      }
      const double mae = total / static_cast<double>(folds);
      result.cells.push_back({m, alpha, mae});
      if (mae < best) {
        best = mae;
        result.m = m;
        result.alpha_max = alpha;
      }
    }
  }
  return result;
}

}  // namespace randens
