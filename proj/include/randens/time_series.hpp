#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "randens/calendar.hpp"
#include "randens/error.hpp"

namespace randens {

/// One seasonal cycle of the shortest period (a day for hourly load data).
struct SeasonalSequence {
  std::vector<double> values;
  /// Calendar sequence number, 1 for the first cycle of the parent series.
  /// Excluded days leave holes in the numbering.
  long index = 1;
  Timestamp start{};

  std::size_t size() const noexcept { return values.size(); }
  Date date() const { return date_of(start); }
  std::chrono::weekday weekday() const { return weekday_of(date()); }
};

/// Timestamped scalar series made of whole cycles of `cycle_length` samples.
///
/// Timestamps are strictly increasing. Within a cycle they advance by a fixed
/// step of 1440/n minutes starting at midnight; between cycles whole days may
/// be missing (excluded dates). Alignment is checked by split_cycles().
class TimeSeries {
 public:
  TimeSeries() = default;

  TimeSeries(std::vector<Timestamp> timestamps, std::vector<double> values,
             std::size_t cycle_length = 24)
      : timestamps_(std::move(timestamps)), values_(std::move(values)), n_(cycle_length) {
    if (timestamps_.size() != values_.size())
      throw Error(ErrorCode::ShapeMismatch, "timestamps and values differ in length");
    if (n_ < 2 || 1440 % n_ != 0)
      throw Error(ErrorCode::InvalidParameter,
                  "cycle length must be >= 2 and divide a day into whole minutes");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k]))
        throw Error(ErrorCode::NonFinite, "non-finite value at " + format_timestamp(timestamps_[k]));
      if (k > 0 && timestamps_[k] <= timestamps_[k - 1]) {
        if (timestamps_[k] == timestamps_[k - 1])
          throw Error(ErrorCode::DuplicateTimestamp, format_timestamp(timestamps_[k]));
        throw Error(ErrorCode::ParseError,
                    "timestamps not increasing at " + format_timestamp(timestamps_[k]));
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t cycle_length() const noexcept { return n_; }
  std::chrono::minutes step() const noexcept { return std::chrono::minutes{1440 / static_cast<long>(n_)}; }
  std::span<const Timestamp> timestamps() const noexcept { return timestamps_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<Timestamp> timestamps_;
  std::vector<double> values_;
  std::size_t n_ = 24;
};

/// Cuts the series into K/n seasonal sequences in temporal order.
inline std::vector<SeasonalSequence> split_cycles(const TimeSeries& series) {
  const std::size_t n = series.cycle_length();
  const std::size_t K = series.size();
  if (K == 0 || K % n != 0)
    throw Error(ErrorCode::MisalignedCycles,
                "series length " + std::to_string(K) + " is not a multiple of " + std::to_string(n));
  const auto ts = series.timestamps();
  const auto vals = series.values();
  const auto step = series.step();
  std::vector<SeasonalSequence> out;
  out.reserve(K / n);
  const Date first = date_of(ts[0]);
  for (std::size_t c = 0; c < K / n; ++c) {
    const std::size_t off = c * n;
    const Timestamp start = ts[off];
    if (start != Timestamp{date_of(start)})
      throw Error(ErrorCode::MisalignedCycles, "cycle does not start at midnight: " + format_timestamp(start));
    for (std::size_t t = 1; t < n; ++t) {
      if (ts[off + t] != start + static_cast<long>(t) * step)
        throw Error(ErrorCode::MisalignedCycles,
                    "irregular sampling inside cycle at " + format_timestamp(ts[off + t]));
    }
    SeasonalSequence seq;
    seq.values.assign(vals.begin() + static_cast<std::ptrdiff_t>(off),
                      vals.begin() + static_cast<std::ptrdiff_t>(off + n));
    seq.start = start;
    seq.index = static_cast<long>((date_of(start) - first).count()) + 1;
    out.push_back(std::move(seq));
  }
  return out;
}

/// Cycle lookup by calendar date.
class CycleIndex {
 public:
  explicit CycleIndex(std::vector<SeasonalSequence> cycles) : cycles_(std::move(cycles)) {
    if (!cycles_.empty()) {
      first_ = cycles_.front().date();
      const auto span = (cycles_.back().date() - first_).count() + 1;
      slot_.assign(static_cast<std::size_t>(span), -1);
      for (std::size_t c = 0; c < cycles_.size(); ++c)
        slot_[static_cast<std::size_t>((cycles_[c].date() - first_).count())] = static_cast<long>(c);
    }
  }

  explicit CycleIndex(const TimeSeries& series) : CycleIndex(split_cycles(series)) {}

  const std::vector<SeasonalSequence>& cycles() const noexcept { return cycles_; }

  const SeasonalSequence* find(Date d) const {
    if (cycles_.empty() || d < first_) return nullptr;
    const auto off = static_cast<std::size_t>((d - first_).count());
    if (off >= slot_.size() || slot_[off] < 0) return nullptr;
    return &cycles_[static_cast<std::size_t>(slot_[off])];
  }

  bool contains(Date d) const { return find(d) != nullptr; }

 private:
  std::vector<SeasonalSequence> cycles_;
  Date first_{};
  std::vector<long> slot_;
};

}  // namespace randens
