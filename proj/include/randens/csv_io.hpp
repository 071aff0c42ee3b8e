#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "randens/calendar.hpp"
#include "randens/error.hpp"
#include "randens/time_series.hpp"

namespace randens {

struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  /// Fixed offset of the series clock ("UTC", "+01:00", ...). Data observed
  /// under DST must be normalized to a fixed offset beforehand.
  std::string timezone = "UTC";
  std::size_t cycle_length = 24;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

/// One ISO date per line; blank lines and `#` comments are ignored.
inline std::vector<Date> parse_exclusions(std::istream& in) {
  std::vector<Date> out;
  std::string line;
  while (std::getline(in, line)) {
    auto s = detail::trim(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = detail::trim(s.substr(0, hash));
    if (s.empty()) continue;
    out.push_back(parse_date(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<Date> load_exclusions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open exclusion list " + path);
  return parse_exclusions(in);
}

/// Reads a header-row CSV into a validated series.
///
/// Rows on excluded dates are dropped as whole cycles. Missing samples are a
/// GapError unless they fall on an excluded date.
inline TimeSeries parse_csv(std::istream& in, const CsvSchema& schema, const std::vector<Date>& excluded = {}) {
  const auto offset = parse_utc_offset(schema.timezone);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty CSV input");
  ++line_no;
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = detail::split_fields(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::ParseError, "row 1: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ts_col = column(schema.timestamp_column);
  const std::size_t val_col = column(schema.value_column);

  std::vector<Timestamp> ts;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    const auto where = "row " + std::to_string(line_no);
    if (fields.size() <= std::max(ts_col, val_col)) throw Error(ErrorCode::ParseError, where + ": too few fields");
    const auto t = parse_timestamp(fields[ts_col], offset);
    if (!t) throw Error(ErrorCode::ParseError, where + ": bad timestamp '" + std::string(fields[ts_col]) + "'");
    double v = 0.0;
    if (!detail::parse_double(fields[val_col], v))
      throw Error(ErrorCode::ParseError, where + ": bad value '" + std::string(fields[val_col]) + "'");
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, where + ": non-finite value");
    if (!ts.empty() && *t <= ts.back()) {
      if (*t == ts.back()) throw Error(ErrorCode::DuplicateTimestamp, where + ": " + format_timestamp(*t));
      throw Error(ErrorCode::ParseError, where + ": timestamps must be increasing");
    }
    ts.push_back(*t);
    vals.push_back(v);
  }
  if (ts.empty()) throw Error(ErrorCode::ParseError, "CSV has no data rows");

  const std::set<Date> skip(excluded.begin(), excluded.end());
  if (schema.cycle_length < 2 || 1440 % schema.cycle_length != 0)
    throw Error(ErrorCode::InvalidParameter, "cycle length must divide a day into whole minutes");
  const std::chrono::minutes step{1440 / static_cast<long>(schema.cycle_length)};

  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    for (Timestamp t = ts[k - 1] + step; t < ts[k]; t += step) {
      if (skip.count(date_of(t))) continue;
      if (missing.size() < 20) missing.push_back(format_timestamp(t));
      ++missing_count;
    }
  }
  if (missing_count > 0) {
    std::string msg = std::to_string(missing_count) + " missing timestamp(s):";
    for (const auto& m : missing) msg += " " + m;
    if (missing_count > missing.size()) msg += " ...";
    throw Error(ErrorCode::GapError, msg);
  }

  std::vector<Timestamp> kept_ts;
  std::vector<double> kept_vals;
  kept_ts.reserve(ts.size());
  kept_vals.reserve(vals.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (skip.count(date_of(ts[k]))) continue;
    kept_ts.push_back(ts[k]);
    kept_vals.push_back(vals[k]);
  }
  if (kept_ts.empty()) throw Error(ErrorCode::ParseError, "every row falls on an excluded date");
  if (kept_ts.front() != Timestamp{date_of(kept_ts.front())} || kept_ts.size() % schema.cycle_length != 0)
    throw Error(ErrorCode::MisalignedCycles, "data must cover whole days starting at 00:00");
  TimeSeries series(std::move(kept_ts), std::move(kept_vals), schema.cycle_length);
  split_cycles(series);  // validates cycle alignment
  return series;
}

inline TimeSeries load_csv(const std::string& path, const CsvSchema& schema = {},
                           const std::vector<Date>& excluded = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return parse_csv(in, schema, excluded);
}

inline void write_series_csv(std::ostream& out, const TimeSeries& series) {
  out << "timestamp,value\n";
  const auto ts = series.timestamps();
  const auto vals = series.values();
  char buf[64];
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
    out << format_timestamp(ts[k]) << ',' << buf << '\n';
  }
}

}  // namespace randens
