#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "randens/error.hpp"

namespace randens {

/// Calendar day. All series live on a fixed-offset wall clock, so a
/// sys_days value is read as a local date in that clock.
using Date = std::chrono::sys_days;
/// Minute-resolution instant on the series' fixed-offset clock.
using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::optional<Date> parse_ymd(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
      !parse_int(s.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

}  // namespace detail

/// Parses `YYYY-MM-DD`.
inline Date parse_date(std::string_view s) {
  auto d = detail::parse_ymd(s);
  if (!d) throw Error(ErrorCode::ParseError, "invalid date '" + std::string(s) + "'");
  return *d;
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Parses a fixed UTC offset: `UTC`, `Z`, `+hh:mm`, `-hh:mm`, `+hhmm` or
/// `UTC+hh:mm`. Named zones with DST rules are rejected.
inline std::chrono::minutes parse_utc_offset(std::string_view s) {
  if (s.starts_with("UTC") || s.starts_with("GMT")) s.remove_prefix(3);
  if (s.empty() || s == "Z") return std::chrono::minutes{0};
  const char sign = s.front();
  if (sign != '+' && sign != '-')
    throw Error(ErrorCode::ParseError, "unsupported timezone '" + std::string(s) +
                                           "' (use UTC or a fixed offset like +01:00)");
  s.remove_prefix(1);
  int hh = 0, mm = 0;
  bool ok = false;
  if (s.size() == 5 && s[2] == ':')
    ok = detail::parse_int(s.substr(0, 2), hh) && detail::parse_int(s.substr(3, 2), mm);
  else if (s.size() == 4)
    ok = detail::parse_int(s.substr(0, 2), hh) && detail::parse_int(s.substr(2, 2), mm);
  else if (s.size() == 2)
    ok = detail::parse_int(s, hh);
  if (!ok || hh > 14 || mm > 59)
    throw Error(ErrorCode::ParseError, "invalid UTC offset '" + std::string(s) + "'");
  const std::chrono::minutes off{hh * 60 + mm};
  return sign == '-' ? -off : off;
}

/// Parses an ISO-8601 timestamp `YYYY-MM-DD[T| ]hh:mm[:ss][Z|+hh:mm]` and
/// returns it on the clock whose offset is `clock_offset`. A timestamp
/// without its own offset is taken to already be on that clock.
inline std::optional<Timestamp> parse_timestamp(std::string_view s,
                                                std::chrono::minutes clock_offset) {
  if (s.size() < 16) return std::nullopt;
  auto date = detail::parse_ymd(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!detail::parse_int(s.substr(11, 2), hh) || !detail::parse_int(s.substr(14, 2), mm))
    return std::nullopt;
  std::string_view rest = s.substr(16);
  if (!rest.empty() && rest.front() == ':') {
    if (rest.size() < 3 || !detail::parse_int(rest.substr(1, 2), ss)) return std::nullopt;
    rest.remove_prefix(3);
    if (!rest.empty() && rest.front() == '.') {
      std::size_t k = 1;
      while (k < rest.size() && rest[k] >= '0' && rest[k] <= '9') ++k;
      rest.remove_prefix(k);
    }
  }
  if (hh > 23 || mm > 59 || ss > 59 || ss != 0) return std::nullopt;
  Timestamp t = Timestamp{*date} + std::chrono::hours{hh} + std::chrono::minutes{mm};
  if (!rest.empty()) {
    std::chrono::minutes own{};
    try {
      own = parse_utc_offset(rest);
    } catch (const Error&) {
      return std::nullopt;
    }
    t = t - own + clock_offset;
  }
  return t;
}

inline std::string format_timestamp(Timestamp t) {
  const Date d = std::chrono::floor<std::chrono::days>(t);
  const auto mins = (t - d).count();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(mins / 60),
                static_cast<int>(mins % 60));
  return format_date(d) + "T" + buf;
}

inline Date date_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

inline std::chrono::weekday weekday_of(Date d) { return std::chrono::weekday{d}; }

/// 1-based day of year.
inline int day_of_year(Date d) {
  const std::chrono::year_month_day ymd{d};
  const Date jan1{ymd.year() / std::chrono::January / 1};
  return static_cast<int>((d - jan1).count()) + 1;
}

}  // namespace randens
