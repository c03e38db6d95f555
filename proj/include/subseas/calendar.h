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

#ifndef SUBSEAS_CALENDAR_H_
#define SUBSEAS_CALENDAR_H_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace subseas {

// Mean tropical year length used by the window arithmetic of every corrector.
inline constexpr double kDaysPerYear = 365.242199;

// Proleptic-Gregorian calendar date stored as a day ordinal (days since
// 1970-01-01). Ordering and differences are exact day counts.
class CalendarDate {
 public:
  constexpr CalendarDate() = default;
  // Throws DomainError for an invalid Gregorian date.
  CalendarDate(int year, unsigned month, unsigned day);

  static CalendarDate FromOrdinal(int64_t ordinal);
  // Parses YYYY-MM-DD. Throws DomainError on malformed text.
  static CalendarDate Parse(std::string_view iso);

  int year() const { return year_; }
  unsigned month() const { return month_; }
  unsigned day() const { return day_; }
  int64_t ordinal() const { return ordinal_; }
  bool is_leap_year() const;

  std::string iso() const;

  CalendarDate operator+(int64_t days) const { return FromOrdinal(ordinal_ + days); }
  CalendarDate operator-(int64_t days) const { return FromOrdinal(ordinal_ - days); }
  friend int64_t operator-(CalendarDate a, CalendarDate b) {
    return a.ordinal_ - b.ordinal_;
  }
  friend bool operator==(CalendarDate a, CalendarDate b) {
    return a.ordinal_ == b.ordinal_;
  }
  friend std::strong_ordering operator<=>(CalendarDate a, CalendarDate b) {
    return a.ordinal_ <=> b.ordinal_;
  }

 private:
  int32_t ordinal_ = 0;
  int16_t year_ = 1970;
  uint8_t month_ = 1;
  uint8_t day_ = 1;
};

// Month/day pair, e.g. the key of a climatology table.
struct MonthDay {
  unsigned month = 1;
  unsigned day = 1;

  static MonthDay Of(CalendarDate d) { return {d.month(), d.day()}; }
  bool is_feb29() const { return month == 2 && day == 29; }
  // Index in [0, 366) over the leap-year calendar (Feb 29 = 59).
  int leap_index() const;
  // Index in [0, 365) skipping Feb 29; Feb 29 maps onto Feb 28.
  int noleap_index() const;
  static MonthDay FromLeapIndex(int index);
  static MonthDay FromNoleapIndex(int index);

  friend bool operator==(MonthDay, MonthDay) = default;
};

// Cyclic distance in days between two month-day pairs on the 366-slot
// calendar, in [0, 183].
int month_day_distance(MonthDay a, MonthDay b);

// Day-of-year window distance used to select training dates:
//   365/2 - |floor((t_star - t) mod D) - 365/2|, in [0, 182.5].
// Throws DomainError when t is after t_star.
double day_diff(CalendarDate t_star, CalendarDate t);
double day_diff_offset(int64_t offset_days);

// floor((t_star - t) / D). Throws DomainError when t is after t_star.
int64_t year_diff(CalendarDate t_star, CalendarDate t);
int64_t year_diff_offset(int64_t offset_days);

enum class Season { kDJF, kMAM, kJJA, kSON };
Season season_of(CalendarDate d);
std::string_view season_name(Season s);

}  // namespace subseas

#endif  // SUBSEAS_CALENDAR_H_
