#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "randens/calendar.hpp"
#include "randens/error.hpp"
#include "randens/time_series.hpp"

namespace randens {

/// Mean and root-sum-of-squares dispersion of an input cycle. Both encode the
/// paired output and decode the forecast.
struct CodingVariables {
  double mean = 0.0;
  double dispersion = 1.0;
};

/// Zero-mean, unit-norm representation of one cycle.
struct InputPattern {
  std::vector<double> x;
  long source_index = 0;
};

/// Future cycle expressed in the coding variables of its input cycle.
struct OutputPattern {
  std::vector<double> y;
  long source_index = 0;
  int horizon = 1;
};

struct PatternPair {
  InputPattern input;
  OutputPattern output;
  CodingVariables coding;
  Date input_date{};
  Date output_date{};
};

struct TrainingSet {
  std::vector<PatternPair> pairs;
  std::size_t n = 0;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  for (double e : v)
    if (!std::isfinite(e)) throw Error(ErrorCode::NonFinite, std::string(what) + " contains a non-finite value");
}

inline void require_coding(const CodingVariables& c) {
  if (!std::isfinite(c.mean) || !std::isfinite(c.dispersion))
    throw Error(ErrorCode::NonFinite, "coding variables are not finite");
  if (!(c.dispersion > 0.0)) throw Error(ErrorCode::ZeroDispersion, "coding dispersion must be positive");
}

}  // namespace detail

/// Mean and un-normalized root-sum-of-squares dispersion of a cycle.
inline CodingVariables coding_of(std::span<const double> e) {
  if (e.size() < 2) throw Error(ErrorCode::InvalidParameter, "sequence needs at least 2 values");
  detail::require_finite(e, "sequence");
  const double n = static_cast<double>(e.size());
  // Two-pass mean with a residual correction keeps cycles with a large
  // offset relative to their spread well centred.
  const double rough = std::accumulate(e.begin(), e.end(), 0.0) / n;
  double residual = 0.0;
  for (double v : e) residual += v - rough;
  const double mean = rough + residual / n;
  double ss = 0.0, peak = 0.0;
  for (double v : e) {
    ss += (v - mean) * (v - mean);
    peak = std::max(peak, std::abs(v));
  }
  const double dispersion = std::sqrt(ss);
  // Anything at the level of round-off in the mean is a constant cycle.
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::sqrt(n) * peak;
  if (!(dispersion > floor))
    throw Error(ErrorCode::ZeroDispersion, "sequence has zero dispersion");
  return {mean, dispersion};
}

inline std::vector<double> encode_values(std::span<const double> e, const CodingVariables& c) {
  detail::require_coding(c);
  detail::require_finite(e, "sequence");
  std::vector<double> out(e.size());
  for (std::size_t t = 0; t < e.size(); ++t) out[t] = (e[t] - c.mean) / c.dispersion;
  return out;
}

struct EncodedInput {
  InputPattern pattern;
  CodingVariables coding;
};

inline EncodedInput encode_input(const SeasonalSequence& seq) {
  const CodingVariables c = coding_of(seq.values);
  return {InputPattern{encode_values(seq.values, c), seq.index}, c};
}

inline EncodedInput encode_input(std::span<const double> values) {
  const CodingVariables c = coding_of(values);
  return {InputPattern{encode_values(values, c), 0}, c};
}

/// Encodes a future cycle with the coding variables of the input cycle.
inline OutputPattern encode_output(const SeasonalSequence& future, const CodingVariables& coding,
                                   long source_index = 0, int horizon = 1) {
  return OutputPattern{encode_values(future.values, coding), source_index, horizon};
}

inline OutputPattern encode_output(std::span<const double> future, const CodingVariables& coding) {
  return OutputPattern{encode_values(future, coding), 0, 1};
}

inline std::vector<double> decode(std::span<const double> y_hat, const CodingVariables& coding) {
  detail::require_coding(coding);
  detail::require_finite(y_hat, "pattern");
  std::vector<double> out(y_hat.size());
  for (std::size_t t = 0; t < y_hat.size(); ++t) out[t] = y_hat[t] * coding.dispersion + coding.mean;
  return out;
}

inline SeasonalSequence decode(const OutputPattern& y_hat, const CodingVariables& coding) {
  SeasonalSequence s;
  s.values = decode(y_hat.y, coding);
  s.index = y_hat.source_index + y_hat.horizon;
  return s;
}

struct TrainingSetOptions {
  /// Forecast horizon in cycles (days for hourly data).
  int horizon = 1;
  /// Keep only pairs whose input and output weekdays match those of the query
  /// input cycle and the forecasted cycle.
  bool weekday_pairing = true;
  /// Extra dates to drop on top of those already absent from the series.
  std::vector<Date> excluded;
};

/// Historical pairs for forecasting the cycle on `query_date`.
///
/// The query input cycle sits at `query_date - horizon`; only pairs whose
/// output cycle ends at or before that forecast origin are used, so nothing
/// from the forecast day or later enters the set. Pairs are ordered by
/// input sequence index.
inline TrainingSet build_training_set(const CycleIndex& cycles, Date query_date,
                                      const TrainingSetOptions& opt = {}) {
  if (opt.horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  const std::chrono::days tau{opt.horizon};
  const Date origin = query_date - tau;
  const auto query_in_wd = weekday_of(origin);
  const auto query_out_wd = weekday_of(query_date);
  auto is_excluded = [&](Date d) {
    return std::find(opt.excluded.begin(), opt.excluded.end(), d) != opt.excluded.end();
  };

  TrainingSet phi;
  for (const auto& in : cycles.cycles()) {
    const Date d_in = in.date();
    const Date d_out = d_in + tau;
    if (d_out > origin) break;
    if (opt.weekday_pairing && (weekday_of(d_in) != query_in_wd || weekday_of(d_out) != query_out_wd))
      continue;
    const SeasonalSequence* out = cycles.find(d_out);
    if (out == nullptr || is_excluded(d_in) || is_excluded(d_out)) continue;
    auto enc = encode_input(in);
    PatternPair p;
    p.output = encode_output(*out, enc.coding, in.index, opt.horizon);
    p.input = std::move(enc.pattern);
    p.coding = enc.coding;
    p.input_date = d_in;
    p.output_date = d_out;
    phi.pairs.push_back(std::move(p));
  }
  if (phi.pairs.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "no training pair qualifies for " + format_date(query_date));
  phi.n = phi.pairs.front().input.x.size();
  return phi;
}

inline TrainingSet build_training_set(const TimeSeries& series, Date query_date,
                                      const TrainingSetOptions& opt = {}) {
  return build_training_set(CycleIndex(series), query_date, opt);
}

/// Encoded query cycle (the one `horizon` cycles before `query_date`).
inline EncodedInput make_query(const CycleIndex& cycles, Date query_date, int horizon = 1) {
  const Date origin = query_date - std::chrono::days{horizon};
  const SeasonalSequence* q = cycles.find(origin);
  if (q == nullptr)
    throw Error(ErrorCode::MissingHistory, "query cycle " + format_date(origin) + " is not in the series");
  return encode_input(*q);
}

}  // namespace randens
