#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "randens/calendar.hpp"
#include "randens/error.hpp"
#include "randens/random.hpp"
#include "randens/time_series.hpp"

namespace randens {

/// Two-peak daily load profile, strictly positive.
inline std::vector<double> default_daily_shape(std::size_t n = 24) {
  std::vector<double> s(n);
  for (std::size_t h = 0; h < n; ++h) {
    const double hour = 24.0 * static_cast<double>(h) / static_cast<double>(n);
    s[h] = 0.75 + 0.20 * std::exp(-(hour - 10.0) * (hour - 10.0) / 8.0) +
           0.30 * std::exp(-(hour - 19.0) * (hour - 19.0) / 6.0);
  }
  return s;
}

/// Parameters of a triple-seasonal (yearly, weekly, daily) synthetic load.
struct SynthParams {
  Date start = Date{std::chrono::year{2012} / std::chrono::January / 1};
  std::size_t days = 730;
  /// Multipliers for Monday .. Sunday.
  std::array<double, 7> weekday_amplitudes{1.00, 1.02, 1.02, 1.01, 0.98, 0.85, 0.78};
  std::vector<double> daily_shape = default_daily_shape();
  double yearly_amplitude = 0.15;
  double noise_sd = 0.01;
  double base = 1000.0;
  std::uint64_t seed = 1;
};

inline std::size_t monday_index(std::chrono::weekday wd) { return (wd.c_encoding() + 6) % 7; }

/// Noise-free value at (date, sample-of-day).
inline double synth_value(const SynthParams& p, Date d, std::size_t h) {
  const double yearly = 1.0 + p.yearly_amplitude * std::sin(2.0 * std::numbers::pi * day_of_year(d) / 365.0);
  return p.base * yearly * p.weekday_amplitudes[monday_index(weekday_of(d))] * p.daily_shape[h];
}

/// value = base * (1 + A sin(2 pi doy / 365)) * w(weekday) * shape(h) * (1 + eps),
/// eps ~ N(0, noise_sd), drawn in time order from Rng(seed).
inline TimeSeries synth_series(const SynthParams& p) {
  const std::size_t n = p.daily_shape.size();
  if (p.days < 14) throw Error(ErrorCode::InvalidParameter, "synthetic series needs at least 14 days");
  if (n < 2 || 1440 % n != 0) throw Error(ErrorCode::InvalidParameter, "daily shape length must divide 1440 minutes");
  if (!(p.noise_sd >= 0.0) || !std::isfinite(p.noise_sd))
    throw Error(ErrorCode::InvalidParameter, "noise_sd must be >= 0");
  if (!std::isfinite(p.yearly_amplitude) || !std::isfinite(p.base))
    throw Error(ErrorCode::InvalidParameter, "amplitudes must be finite");
  for (double w : p.weekday_amplitudes)
    if (!std::isfinite(w)) throw Error(ErrorCode::InvalidParameter, "weekday amplitudes must be finite");
  for (double s : p.daily_shape)
    if (!std::isfinite(s)) throw Error(ErrorCode::InvalidParameter, "daily shape must be finite");

  Rng rng(p.seed);
  const std::chrono::minutes step{1440 / static_cast<long>(n)};
  std::vector<Timestamp> ts;
  std::vector<double> vals;
  ts.reserve(p.days * n);
  vals.reserve(p.days * n);
  for (std::size_t d = 0; d < p.days; ++d) {
    const Date day = p.start + std::chrono::days{static_cast<long>(d)};
    for (std::size_t h = 0; h < n; ++h) {
      const double clean = synth_value(p, day, h);
      ts.push_back(Timestamp{day} + static_cast<long>(h) * step);
      vals.push_back(p.noise_sd > 0.0 ? clean * (1.0 + rng.normal(0.0, p.noise_sd)) : clean);
    }
  }
  return TimeSeries(std::move(ts), std::move(vals), n);
}

}  // namespace randens
