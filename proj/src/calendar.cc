/*
 * Copyright 2026 The Subseas Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "subseas/calendar.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "subseas/error.h"

namespace subseas {
namespace {

namespace chr = std::chrono;

// Cumulative day counts before each month in a leap year.
constexpr int kLeapMonthStart[13] = {0,   31,  60,  91,  121, 152, 182,
                                     213, 244, 274, 305, 335, 366};

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

CalendarDate::CalendarDate(int year, unsigned month, unsigned day) {
  chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok() || year < -32000 || year > 32000) {
    throw DomainError("invalid calendar date " + std::to_string(year) + "-" +
                      std::to_string(month) + "-" + std::to_string(day));
  }
  ordinal_ = static_cast<int32_t>(chr::sys_days{ymd}.time_since_epoch().count());
  year_ = static_cast<int16_t>(year);
  month_ = static_cast<uint8_t>(month);
  day_ = static_cast<uint8_t>(day);
}

CalendarDate CalendarDate::FromOrdinal(int64_t ordinal) {
  chr::year_month_day ymd{chr::sys_days{chr::days{ordinal}}};
  CalendarDate d;
  d.ordinal_ = static_cast<int32_t>(ordinal);
  d.year_ = static_cast<int16_t>(static_cast<int>(ymd.year()));
  d.month_ = static_cast<uint8_t>(static_cast<unsigned>(ymd.month()));
  d.day_ = static_cast<uint8_t>(static_cast<unsigned>(ymd.day()));
  return d;
}

CalendarDate CalendarDate::Parse(std::string_view iso) {
  // YYYY-MM-DD, year may carry 4+ digits.
  const size_t first = iso.find('-', 1);
  const size_t second = first == std::string_view::npos
                            ? std::string_view::npos
                            : iso.find('-', first + 1);
  unsigned y = 0, m = 0, d = 0;
  if (second == std::string_view::npos || !parse_uint(iso.substr(0, first), y) ||
      !parse_uint(iso.substr(first + 1, second - first - 1), m) ||
      !parse_uint(iso.substr(second + 1), d) || second - first != 3 ||
      iso.size() - second != 3) {
    throw DomainError("malformed ISO-8601 date '" + std::string(iso) + "'");
  }
  return CalendarDate(static_cast<int>(y), m, d);
}

bool CalendarDate::is_leap_year() const {
  return chr::year{year_}.is_leap();
}

std::string CalendarDate::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(year_),
                static_cast<unsigned>(month_), static_cast<unsigned>(day_));
  return buf;
}

int MonthDay::leap_index() const {
  return kLeapMonthStart[month - 1] + static_cast<int>(day) - 1;
}

int MonthDay::noleap_index() const {
  const int idx = leap_index();
  return idx >= 59 ? idx - 1 : idx;
}

MonthDay MonthDay::FromLeapIndex(int index) {
  unsigned m = 1;
  while (m < 12 && kLeapMonthStart[m] <= index) ++m;
  return {m, static_cast<unsigned>(index - kLeapMonthStart[m - 1] + 1)};
}

MonthDay MonthDay::FromNoleapIndex(int index) {
  return FromLeapIndex(index >= 59 ? index + 1 : index);
}

int month_day_distance(MonthDay a, MonthDay b) {
  const int d = std::abs(a.leap_index() - b.leap_index());
  return std::min(d, 366 - d);
}

double day_diff_offset(int64_t offset_days) {
  if (offset_days < 0) throw DomainError("day_diff: t is after t_star");
  const double m = std::fmod(static_cast<double>(offset_days), kDaysPerYear);
  return 365.0 / 2.0 - std::fabs(std::floor(m) - 365.0 / 2.0);
}

double day_diff(CalendarDate t_star, CalendarDate t) {
  return day_diff_offset(t_star - t);
}

int64_t year_diff_offset(int64_t offset_days) {
  if (offset_days < 0) throw DomainError("year_diff: t is after t_star");
  return static_cast<int64_t>(
      std::floor(static_cast<double>(offset_days) / kDaysPerYear));
}

int64_t year_diff(CalendarDate t_star, CalendarDate t) {
  return year_diff_offset(t_star - t);
}

Season season_of(CalendarDate d) {
  switch (d.month()) {
    case 12: case 1: case 2: return Season::kDJF;
    case 3: case 4: case 5: return Season::kMAM;
    case 6: case 7: case 8: return Season::kJJA;
    default: return Season::kSON;
  }
}

std::string_view season_name(Season s) {
  switch (s) {
    case Season::kDJF: return "DJF";
    case Season::kMAM: return "MAM";
    case Season::kJJA: return "JJA";
    case Season::kSON: return "SON";
  }
  return "?";
}

}  // namespace subseas
