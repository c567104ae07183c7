/* Copyright 2026 The AppWatch Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "appwatch/error.hpp"

namespace appwatch {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

inline Date make_date(int y, unsigned m, unsigned d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    fail(ErrorCode::kValidation, "invalid calendar date " + std::to_string(y) +
                                     "-" + std::to_string(m) + "-" +
                                     std::to_string(d));
  }
  return Date{ymd};
}

inline Date date_of(Timestamp t) {
  return std::chrono::floor<std::chrono::days>(t);
}

inline long days_between(Date from, Date to) {
  return (to - from).count();
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

inline std::string format_rfc3339(Timestamp t) {
  const Date d = date_of(t);
  const std::chrono::hh_mm_ss hms{t - d};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ldZ", format_date(d).c_str(),
                long(hms.hours().count()), long(hms.minutes().count()),
                long(hms.seconds().count()));
  return buf;
}

namespace detail {

inline int parse_digits(std::string_view s, std::size_t pos, std::size_t len,
                        std::string_view whole) {
  int value = 0;
  if (pos + len > s.size()) {
    fail(ErrorCode::kParse, "truncated date-time '" + std::string(whole) + "'");
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc{} || ptr != s.data() + pos + len) {
    fail(ErrorCode::kParse, "malformed date-time '" + std::string(whole) + "'");
  }
  return value;
}

inline void expect_char(std::string_view s, std::size_t pos, char c,
                        std::string_view whole) {
  if (pos >= s.size() || s[pos] != c) {
    fail(ErrorCode::kParse, "malformed date-time '" + std::string(whole) + "'");
  }
}

}  // namespace detail

/// Parses YYYY-MM-DD.
inline Date parse_date(std::string_view s) {
  if (s.size() != 10) {
    fail(ErrorCode::kParse, "malformed date '" + std::string(s) + "'");
  }
  detail::expect_char(s, 4, '-', s);
  detail::expect_char(s, 7, '-', s);
  return make_date(detail::parse_digits(s, 0, 4, s),
                   unsigned(detail::parse_digits(s, 5, 2, s)),
                   unsigned(detail::parse_digits(s, 8, 2, s)));
}

/// Parses an RFC 3339 date-time, normalizing any offset to UTC.
/// Fractional seconds are truncated.
inline Timestamp parse_rfc3339(std::string_view s) {
  const Date d = parse_date(s.substr(0, std::min<std::size_t>(10, s.size())));
  if (s.size() < 20 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) {
    fail(ErrorCode::kParse, "malformed date-time '" + std::string(s) + "'");
  }
  detail::expect_char(s, 13, ':', s);
  detail::expect_char(s, 16, ':', s);
  const int hh = detail::parse_digits(s, 11, 2, s);
  const int mm = detail::parse_digits(s, 14, 2, s);
  const int ss = detail::parse_digits(s, 17, 2, s);
  if (hh > 23 || mm > 59 || ss > 60) {
    fail(ErrorCode::kParse, "out-of-range time in '" + std::string(s) + "'");
  }
  std::size_t pos = 19;
  if (s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  std::chrono::seconds offset{0};
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '+' ? 1 : -1;
    detail::expect_char(s, pos + 3, ':', s);
    const int oh = detail::parse_digits(s, pos + 1, 2, s);
    const int om = detail::parse_digits(s, pos + 4, 2, s);
    offset = std::chrono::seconds{sign * (oh * 3600 + om * 60)};
    pos += 6;
  } else {
    fail(ErrorCode::kParse, "missing UTC offset in '" + std::string(s) + "'");
  }
  if (pos != s.size()) {
    fail(ErrorCode::kParse, "trailing characters in '" + std::string(s) + "'");
  }
  return Timestamp{d} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
         std::chrono::seconds{ss} - offset;
}

/// Winter monitoring window [start_date, end_date).
struct SeasonWindow {
  int season_year = 0;
  Date start_date{};
  Date end_date{};

  /// November 1 of `year` through March 1 of the following year.
  static SeasonWindow winter(int year) {
    return SeasonWindow{year, make_date(year, 11, 1), make_date(year + 1, 3, 1)};
  }

  static SeasonWindow make(int year, Date start, Date end) {
    if (!(start < end)) {
      fail(ErrorCode::kValidation, "season window must start before it ends");
    }
    return SeasonWindow{year, start, end};
  }

  bool contains(Date d) const { return d >= start_date && d < end_date; }
  bool contains(Timestamp t) const { return contains(date_of(t)); }
  long length_days() const { return days_between(start_date, end_date); }

  friend bool operator==(const SeasonWindow&, const SeasonWindow&) = default;
};

}  // namespace appwatch
