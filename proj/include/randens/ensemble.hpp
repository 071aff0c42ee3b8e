#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randens/error.hpp"
#include "randens/parallel.hpp"
#include "randens/patterns.hpp"
#include "randens/randnn.hpp"
#include "randens/random.hpp"

namespace randens {

/// The six ways of making ensemble members differ.
enum class Strategy {
  E1,  ///< fresh hidden parameters per member; parameter = alpha_max (degrees)
  E2,  ///< training-subset sampling; parameter = eta
  E3,  ///< feature subsetting; parameter = kappa
  E4,  ///< hidden node pruning; parameter = rho
  E5,  ///< hidden weight pruning; parameter = lambda
  E6,  ///< multiplicative noise on training patterns; parameter = sigma
};

inline std::string_view to_string(Strategy s) {
  constexpr std::string_view names[] = {"E1", "E2", "E3", "E4", "E5", "E6"};
  return names[static_cast<int>(s)];
}

inline Strategy parse_strategy(std::string_view s) {
  constexpr Strategy all[] = {Strategy::E1, Strategy::E2, Strategy::E3, Strategy::E4, Strategy::E5, Strategy::E6};
  for (Strategy k : all)
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidParameter, "unknown strategy '" + std::string(s) + "' (expected E1..E6)");
}

inline std::string_view parameter_name(Strategy s) {
  constexpr std::string_view names[] = {"alpha_max", "eta", "kappa", "rho", "lambda", "sigma"};
  return names[static_cast<int>(s)];
}

struct DiversityStrategy {
  Strategy kind = Strategy::E1;
  double parameter = 70.0;
  /// Hidden nodes of the template network; 0 means "use the base config's m".
  std::size_t base_m = 0;
  /// E3 only: reuse the template's full-feature biases instead of re-anchoring
  /// them on the selected features.
  bool reuse_template_biases = false;

  void validate() const {
    const double p = parameter;
    auto bad = [&](const char* domain) {
      throw Error(ErrorCode::InvalidParameter, std::string(parameter_name(kind)) + " = " + std::to_string(p) +
                                                   " is outside " + domain);
    };
    if (!std::isfinite(p)) bad("the finite reals");
    switch (kind) {
      case Strategy::E1:
        if (!(p > 0.0 && p < 90.0)) bad("(0, 90)");
        break;
      case Strategy::E2:
      case Strategy::E3:
      case Strategy::E4:
        if (!(p > 0.0 && p <= 1.0)) bad("(0, 1]");
        break;
      case Strategy::E5:
        if (!(p >= 0.0 && p < 1.0)) bad("[0, 1)");
        break;
      case Strategy::E6:
        if (!(p >= 0.0)) bad("[0, inf)");
        break;
    }
  }
};

struct Ensemble {
  std::vector<RandNNModel> members;
  DiversityStrategy strategy;
  /// Hidden layer shared by E2..E6 members before per-member modification.
  std::optional<HiddenLayer> shared_template;

  std::size_t size() const noexcept { return members.size(); }
};

/// round(fraction * total), at least 1.
inline std::size_t fractional_count(double fraction, std::size_t total) {
  const auto c = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  return std::max<std::size_t>(c, 1);
}

/// Builds M members from phi. The shared template (E2..E6) uses seed
/// `base_config.seed`; member k = 1..M uses `base_config.seed + k`.
/// Members are independent, so `jobs > 1` yields the same ensemble.
inline Ensemble train_ensemble(const Matrix& X, const Matrix& Y, const DiversityStrategy& strategy,
                               std::size_t M, const RandNNConfig& base_config, std::size_t jobs = 1) {
  strategy.validate();
  if (M < 1) throw Error(ErrorCode::InvalidParameter, "ensemble size M must be >= 1");
  if (X.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training patterns");
  if (X.rows() != Y.rows()) throw Error(ErrorCode::DimensionMismatch, "X and Y row counts differ");

  RandNNConfig cfg = base_config;
  if (strategy.base_m > 0) cfg.m = strategy.base_m;
  if (strategy.kind == Strategy::E1) cfg.alpha_max = strategy.parameter;
  cfg.validate();

  const std::size_t N = static_cast<std::size_t>(X.rows());
  const std::size_t n = static_cast<std::size_t>(X.cols());
  const std::uint64_t seed_base = cfg.seed;
  auto member_seed = [&](std::size_t k) { return seed_base + static_cast<std::uint64_t>(k) + 1; };

  Ensemble ens;
  ens.strategy = strategy;
  ens.members.resize(M);

  if (strategy.kind == Strategy::E1) {
    parallel_for(M, jobs, [&](std::size_t k) {
      RandNNConfig c = cfg;
      c.seed = member_seed(k);
      ens.members[k] = train(X, Y, c);
    });
    return ens;
  }

  Rng template_rng(seed_base);
  ens.shared_template = generate_hidden_params(n, cfg, X, template_rng);
  const HiddenLayer& tpl = *ens.shared_template;

  switch (strategy.kind) {
    case Strategy::E2: {
      const std::size_t n_sub = fractional_count(strategy.parameter, N);
      const Matrix H = hidden_output(tpl.weights, tpl.biases, X);
      parallel_for(M, jobs, [&](std::size_t k) {
        Rng rng(member_seed(k));
        auto rows = rng.sample_without_replacement(N, n_sub);
        if (rows.empty()) throw Error(ErrorCode::EmptySubsample, "E2 subsample is empty");
        std::sort(rows.begin(), rows.end());
        RandNNModel& mdl = ens.members[k];
        mdl.hidden_weights = tpl.weights;
        mdl.hidden_biases = tpl.biases;
        mdl.output_weights = fit_output_weights(select_rows(H, rows), select_rows(Y, rows));
        mdl.config = cfg;
        mdl.config.seed = member_seed(k);
      });
      break;
    }
    case Strategy::E3: {
      const std::size_t n_sub = std::min(fractional_count(strategy.parameter, n), n);
      parallel_for(M, jobs, [&](std::size_t k) {
        Rng rng(member_seed(k));
        auto feats = rng.sample_without_replacement(n, n_sub);
        if (feats.empty()) throw Error(ErrorCode::EmptySubsample, "E3 feature subset is empty");
        std::sort(feats.begin(), feats.end());
        const Matrix W = select_columns(tpl.weights, feats);
        const Matrix Xk = select_columns(X, feats);
        const Vector b = strategy.reuse_template_biases ? tpl.biases : anchored_biases(W, Xk, tpl.anchors);
        RandNNModel mdl = fit_with_hidden(W, b, Xk, Y, cfg);
        mdl.config.seed = member_seed(k);
        std::vector<bool> mask(n, false);
        for (auto t : feats) mask[t] = true;
        mdl.feature_mask = std::move(mask);
        ens.members[k] = std::move(mdl);
      });
      break;
    }
    case Strategy::E4: {
      const std::size_t keep = std::min(fractional_count(strategy.parameter, tpl.nodes()), tpl.nodes());
      const Matrix H = hidden_output(tpl.weights, tpl.biases, X);
      parallel_for(M, jobs, [&](std::size_t k) {
        Rng rng(member_seed(k));
        auto nodes = rng.sample_without_replacement(tpl.nodes(), keep);
        std::sort(nodes.begin(), nodes.end());
        RandNNModel& mdl = ens.members[k];
        mdl.hidden_weights = select_rows(tpl.weights, nodes);
        mdl.hidden_biases.resize(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t j = 0; j < nodes.size(); ++j)
          mdl.hidden_biases(static_cast<Eigen::Index>(j)) = tpl.biases(static_cast<Eigen::Index>(nodes[j]));
        mdl.output_weights = fit_output_weights(select_columns(H, nodes), Y);
        mdl.config = cfg;
        mdl.config.m = nodes.size();
        mdl.config.seed = member_seed(k);
      });
      break;
    }
    case Strategy::E5: {
      const std::size_t total = tpl.nodes() * n;
      const auto p = static_cast<std::size_t>(std::llround(strategy.parameter * static_cast<double>(total)));
      parallel_for(M, jobs, [&](std::size_t k) {
        Rng rng(member_seed(k));
        Matrix W = tpl.weights;
        for (std::size_t pos : rng.sample_without_replacement(total, p))
          W(static_cast<Eigen::Index>(pos / n), static_cast<Eigen::Index>(pos % n)) = 0.0;
        RandNNModel mdl = fit_with_hidden(W, tpl.biases, X, Y, cfg);
        mdl.config.seed = member_seed(k);
        ens.members[k] = std::move(mdl);
      });
      break;
    }
    case Strategy::E6: {
      const double sigma = strategy.parameter;
      parallel_for(M, jobs, [&](std::size_t k) {
        Rng rng(member_seed(k));
        Matrix Xk = X, Yk = Y;
        for (Eigen::Index i = 0; i < Xk.rows(); ++i)
          for (Eigen::Index t = 0; t < Xk.cols(); ++t) Xk(i, t) *= 1.0 + rng.normal(0.0, sigma);
        for (Eigen::Index i = 0; i < Yk.rows(); ++i)
          for (Eigen::Index t = 0; t < Yk.cols(); ++t) Yk(i, t) *= 1.0 + rng.normal(0.0, sigma);
        RandNNModel mdl = fit_with_hidden(tpl.weights, tpl.biases, Xk, Yk, cfg);
        mdl.config.seed = member_seed(k);
        ens.members[k] = std::move(mdl);
      });
      break;
    }
    case Strategy::E1:
      break;
  }
  return ens;
}

inline Ensemble train_ensemble(const TrainingSet& phi, const DiversityStrategy& strategy, std::size_t M,
                               const RandNNConfig& base_config, std::size_t jobs = 1) {
  if (phi.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training patterns");
  return train_ensemble(input_matrix(phi), output_matrix(phi), strategy, M, base_config, jobs);
}

/// Decoded forecast of every member for one query, M x n. All members are
/// decoded with the query's coding variables.
inline Matrix member_forecasts(const Ensemble& ens, std::span<const double> x_query,
                               const CodingVariables& coding) {
  if (ens.members.empty()) throw Error(ErrorCode::InvalidParameter, "ensemble has no members");
  const auto n_out = static_cast<Eigen::Index>(ens.members.front().output_dim());
  Matrix F(static_cast<Eigen::Index>(ens.size()), n_out);
  for (std::size_t k = 0; k < ens.size(); ++k) {
    const auto e = decode(predict_full(ens.members[k], x_query), coding);
    F.row(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::RowVectorXd>(e.data(), n_out);
  }
  return F;
}

/// Column means of an M x n forecast block, computed as offsets from the first
/// row so identical rows average to themselves exactly.
inline std::vector<double> mean_forecast(const Matrix& F) {
  std::vector<double> out(static_cast<std::size_t>(F.cols()));
  const double M = static_cast<double>(F.rows());
  for (Eigen::Index t = 0; t < F.cols(); ++t) {
    const double ref = F(0, t);
    double acc = 0.0;
    for (Eigen::Index k = 1; k < F.rows(); ++k) acc += F(k, t) - ref;
    out[static_cast<std::size_t>(t)] = ref + acc / M;
  }
  return out;
}

inline std::vector<double> predict_ensemble(const Ensemble& ens, std::span<const double> x_query,
                                            const CodingVariables& coding) {
  return mean_forecast(member_forecasts(ens, x_query, coding));
}

inline std::vector<double> predict_ensemble(const Ensemble& ens, const EncodedInput& query) {
  return predict_ensemble(ens, query.pattern.x, query.coding);
}

/// Forecast for a raw query cycle; the cycle is encoded with `coding`, which
/// is normally its own coding variables.
inline SeasonalSequence predict_ensemble(const Ensemble& ens, const SeasonalSequence& query,
                                         const CodingVariables& coding) {
  SeasonalSequence out;
  out.values = predict_ensemble(ens, encode_values(query.values, coding), coding);
  out.index = query.index + 1;
  return out;
}

struct DiversityReport {
  double value = 0.0;
  std::size_t test_set_size = 0;
};

/// Average population standard deviation of member forecasts over all
/// forecast positions. Each element of `member_forecasts` is the M x n block
/// for one test cycle.
inline DiversityReport diversity(std::span<const Matrix> member_forecasts) {
  DiversityReport rep;
  rep.test_set_size = member_forecasts.size();
  if (member_forecasts.empty()) return rep;
  double total = 0.0;
  std::size_t positions = 0;
  for (const Matrix& F : member_forecasts) {
    if (F.rows() == 0) throw Error(ErrorCode::InvalidParameter, "forecast block has no members");
    const double M = static_cast<double>(F.rows());
    for (Eigen::Index t = 0; t < F.cols(); ++t) {
      // Shifted two-pass variance; exact zero for identical members.
      const double ref = F(0, t);
      double mean = 0.0;
      for (Eigen::Index k = 0; k < F.rows(); ++k) mean += F(k, t) - ref;
      mean /= M;
      double ss = 0.0;
      for (Eigen::Index k = 0; k < F.rows(); ++k) {
        const double d = (F(k, t) - ref) - mean;
        ss += d * d;
      }
      total += std::sqrt(ss / M);
      ++positions;
    }
  }
  rep.value = positions ? total / static_cast<double>(positions) : 0.0;
  return rep;
}

inline DiversityReport diversity(const std::vector<Matrix>& member_forecasts) {
  return diversity(std::span<const Matrix>(member_forecasts));
}

}  // namespace randens
