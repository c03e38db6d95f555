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

#include "subseas/climatology.h"

#include <limits>
#include <string>

#include "subseas/error.h"

namespace subseas {

Climatology::Climatology(Grid grid, YearRange base, std::vector<double> table,
                         std::vector<uint8_t> has_slot)
    : grid_(std::move(grid)),
      base_(base),
      table_(std::move(table)),
      has_slot_(std::move(has_slot)) {
  if (table_.size() != 366 * grid_.size() || has_slot_.size() != 366) {
    throw DataError("climatology table must have 366 x G entries");
  }
}

std::span<const double> Climatology::at(MonthDay md) const {
  int slot = md.leap_index();
  if (!has_slot_[slot] && md.is_feb29()) slot = MonthDay{2, 28}.leap_index();
  if (!has_slot_[slot]) {
    throw DataError("climatology has no entry for " + std::to_string(md.month) +
                    "-" + std::to_string(md.day));
  }
  return {table_.data() + static_cast<size_t>(slot) * grid_.size(), grid_.size()};
}

std::vector<std::vector<std::vector<double>>> month_day_samples(
    const FieldSeries& obs, YearRange base) {
  const size_t G = obs.num_points();
  std::vector<std::vector<std::vector<double>>> samples(
      366, std::vector<std::vector<double>>(G));
  for (size_t r = 0; r < obs.num_dates(); ++r) {
    const CalendarDate d = obs.date(r);
    if (!base.contains(d.year())) continue;
    auto& slot = samples[MonthDay::Of(d).leap_index()];
    for (size_t g = 0; g < G; ++g) {
      if (obs.present(r, g)) slot[g].push_back(obs.at(r, g));
    }
  }
  return samples;
}

Climatology build_climatology(const FieldSeries& obs, YearRange base) {
  if (base.first > base.last) throw DataError("empty climatology base period");
  const size_t G = obs.num_points();

  // Slots that exist in the base-period calendar.
  bool has_leap_year = false;
  for (int y = base.first; y <= base.last; ++y) {
    if (CalendarDate(y, 1, 1).is_leap_year()) has_leap_year = true;
  }

  std::vector<double> sum(366 * G, 0.0);
  std::vector<size_t> count(366 * G, 0);
  size_t base_dates = 0;
  for (size_t r = 0; r < obs.num_dates(); ++r) {
    const CalendarDate d = obs.date(r);
    if (!base.contains(d.year())) continue;
    ++base_dates;
    const size_t slot = static_cast<size_t>(MonthDay::Of(d).leap_index());
    for (size_t g = 0; g < G; ++g) {
      if (!obs.present(r, g)) continue;
      sum[slot * G + g] += obs.at(r, g);
      ++count[slot * G + g];
    }
  }
  if (base_dates == 0) {
    throw DataError("no observations inside base period " +
                    std::to_string(base.first) + "-" + std::to_string(base.last));
  }

  std::vector<double> table(366 * G, std::numeric_limits<double>::quiet_NaN());
  std::vector<uint8_t> has_slot(366, 0);
  for (int slot = 0; slot < 366; ++slot) {
    const MonthDay md = MonthDay::FromLeapIndex(slot);
    if (md.is_feb29() && !has_leap_year) continue;
    for (size_t g = 0; g < G; ++g) {
      const size_t i = static_cast<size_t>(slot) * G + g;
      if (count[i] == 0) {
        throw DataError("base period has no observation for month-day " +
                        std::to_string(md.month) + "-" + std::to_string(md.day) +
                        " at grid point " + std::to_string(g));
      }
      table[i] = sum[i] / static_cast<double>(count[i]);
    }
    has_slot[slot] = 1;
  }
  return Climatology(obs.grid(), base, std::move(table), std::move(has_slot));
}

FieldSeries aggregate_period(const FieldSeries& daily, AggregateMode mode,
                             int period_days) {
  if (period_days < 1) throw DomainError("aggregation period must be >= 1 day");
  const size_t G = daily.num_points();
  std::vector<CalendarDate> dates;
  std::vector<double> values;
  std::vector<uint8_t> present;
  if (daily.empty()) return FieldSeries(daily.grid(), {}, {}, {}, daily.units());
  const CalendarDate last = daily.dates().back();
  for (size_t r = 0; r < daily.num_dates(); ++r) {
    const CalendarDate t = daily.date(r);
    if (t + (period_days - 1) > last) break;
    dates.push_back(t);
    for (size_t g = 0; g < G; ++g) {
      double acc = 0.0;
      bool ok = true;
      for (int k = 0; k < period_days && ok; ++k) {
        auto rr = daily.row_of(t + k);
        if (!rr || !daily.present(*rr, g)) {
          ok = false;
        } else {
          acc += daily.at(*rr, g);
        }
      }
      if (ok && mode == AggregateMode::kMean) acc /= period_days;
      values.push_back(ok ? acc : std::numeric_limits<double>::quiet_NaN());
      present.push_back(ok ? 1 : 0);
    }
  }
  return FieldSeries(daily.grid(), std::move(dates), std::move(values),
                     std::move(present), daily.units());
}

}  // namespace subseas
