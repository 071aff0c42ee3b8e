#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "randens/calendar.hpp"
#include "randens/ensemble.hpp"
#include "randens/error.hpp"
#include "randens/parallel.hpp"
#include "randens/patterns.hpp"
#include "randens/randnn.hpp"
#include "randens/random.hpp"
#include "randens/time_series.hpp"

namespace randens {

/// Copies the cycle seven days before `date`.
inline std::vector<double> naive_forecast(const CycleIndex& cycles, Date date) {
  const SeasonalSequence* past = cycles.find(date - std::chrono::days{7});
  if (past == nullptr)
    throw Error(ErrorCode::MissingHistory, "no cycle on " + format_date(date - std::chrono::days{7}));
  return past->values;
}

inline std::vector<double> naive_forecast(const TimeSeries& series, Date date) {
  return naive_forecast(CycleIndex(series), date);
}

/// What to train for each forecast day.
struct ModelSpec {
  enum class Kind { Naive, Single, Ensemble };
  Kind kind = Kind::Ensemble;
  RandNNConfig base{};
  DiversityStrategy strategy{};
  std::size_t members = 100;
  /// Single model only: when both grids are non-empty, (m, alpha_max) is
  /// chosen per day by grid search with `cv_folds`-fold cross-validation.
  std::vector<std::size_t> m_grid;
  std::vector<double> alpha_grid;
  std::size_t cv_folds = 5;
};

struct RollingOptions {
  Date test_start{};
  Date test_end{};
  int horizon = 1;
  bool weekday_pairing = true;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool keep_member_forecasts = false;
};

struct DayForecast {
  Date date{};
  std::vector<double> actual;
  std::vector<double> forecast;
  /// M x n decoded member forecasts (ensembles, when requested).
  std::optional<Matrix> members;
  std::uint64_t seed = 0;
  std::size_t training_pairs = 0;
};

struct SkippedDay {
  Date date{};
  std::string reason;
};

struct RollingForecastResult {
  std::vector<DayForecast> days;
  std::vector<SkippedDay> skipped;

  Matrix actuals() const { return stack(&DayForecast::actual); }
  Matrix forecasts() const { return stack(&DayForecast::forecast); }
  /// Absolute errors, days x n.
  Matrix losses() const { return (actuals() - forecasts()).cwiseAbs(); }

 private:
  Matrix stack(std::vector<double> DayForecast::*field) const {
    if (days.empty()) return Matrix(0, 0);
    const auto n = static_cast<Eigen::Index>((days.front().*field).size());
    Matrix out(static_cast<Eigen::Index>(days.size()), n);
    for (std::size_t i = 0; i < days.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>((days[i].*field).data(), n);
    return out;
  }
};

/// Seed of the model trained for `date`: derive_seed(run seed, days since 1970-01-01).
inline std::uint64_t day_seed(std::uint64_t run_seed, Date date) {
  return derive_seed(run_seed, static_cast<std::uint64_t>(date.time_since_epoch().count()));
}

namespace detail {

struct DayOutcome {
  std::optional<DayForecast> forecast;
  std::optional<SkippedDay> skipped;
};

inline DayOutcome forecast_one_day(const CycleIndex& cycles, Date date, const ModelSpec& spec,
                                   const RollingOptions& opt) {
  DayOutcome outcome;
  const SeasonalSequence* actual = cycles.find(date);
  if (actual == nullptr) {
    outcome.skipped = SkippedDay{date, "excluded"};
    return outcome;
  }
  DayForecast day;
  day.date = date;
  day.actual = actual->values;
  day.seed = day_seed(opt.seed, date);
  try {
    if (spec.kind == ModelSpec::Kind::Naive) {
      day.forecast = naive_forecast(cycles, date);
      outcome.forecast = std::move(day);
      return outcome;
    }
    TrainingSetOptions tso;
    tso.horizon = opt.horizon;
    tso.weekday_pairing = opt.weekday_pairing;
    const TrainingSet phi = build_training_set(cycles, date, tso);
    for (const auto& p : phi.pairs) {
      if (p.output_date >= date || p.output_date > date - std::chrono::days{opt.horizon})
        throw std::logic_error("training pair on " + format_date(p.output_date) + " leaks into " + format_date(date));
    }
    const EncodedInput query = make_query(cycles, date, opt.horizon);
    day.training_pairs = phi.size();

    RandNNConfig cfg = spec.base;
    cfg.seed = day.seed;
    if (spec.kind == ModelSpec::Kind::Single) {
      if (!spec.m_grid.empty() && !spec.alpha_grid.empty()) {
        const auto best = grid_search_cv(phi, spec.m_grid, spec.alpha_grid, spec.cv_folds, cfg.seed);
        cfg.m = best.m;
        cfg.alpha_max = best.alpha_max;
      }
      const RandNNModel model = train(phi, cfg);
      day.forecast = decode(predict(model, std::span<const double>(query.pattern.x)), query.coding);
    } else {
      const Ensemble ens = train_ensemble(phi, spec.strategy, spec.members, cfg);
      Matrix F = member_forecasts(ens, query.pattern.x, query.coding);
      day.forecast = mean_forecast(F);
      if (opt.keep_member_forecasts) day.members = std::move(F);
    }
    outcome.forecast = std::move(day);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTrainingSet && e.code() != ErrorCode::MissingHistory) throw;
    outcome.skipped = SkippedDay{date, e.what()};
  }
  return outcome;
}

}  // namespace detail

/// Retrains and forecasts every day of [test_start, test_end] using only data
/// before the forecast origin. Each day is independent, so `opt.jobs` only
/// changes the wall time, never the result.
inline RollingForecastResult rolling_forecast(const CycleIndex& cycles, const ModelSpec& spec,
                                              const RollingOptions& opt) {
  if (opt.test_end < opt.test_start) throw Error(ErrorCode::InvalidParameter, "test window ends before it starts");
  if (opt.horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  if (spec.kind != ModelSpec::Kind::Naive) spec.base.validate();
  if (spec.kind == ModelSpec::Kind::Ensemble) spec.strategy.validate();

  const auto count = static_cast<std::size_t>((opt.test_end - opt.test_start).count()) + 1;
  std::vector<detail::DayOutcome> outcomes(count);
  parallel_for(count, opt.jobs, [&](std::size_t i) {
    outcomes[i] = detail::forecast_one_day(cycles, opt.test_start + std::chrono::days{static_cast<long>(i)}, spec, opt);
  });
  RollingForecastResult result;
  for (auto& o : outcomes) {
    if (o.forecast) result.days.push_back(std::move(*o.forecast));
    if (o.skipped) result.skipped.push_back(std::move(*o.skipped));
  }
  return result;
}

inline RollingForecastResult rolling_forecast(const TimeSeries& series, const ModelSpec& spec,
                                              const RollingOptions& opt) {
  return rolling_forecast(CycleIndex(series), spec, opt);
}

}  // namespace randens
