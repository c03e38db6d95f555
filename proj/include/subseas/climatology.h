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

#ifndef SUBSEAS_CLIMATOLOGY_H_
#define SUBSEAS_CLIMATOLOGY_H_

#include <span>
#include <utility>
#include <vector>

#include "subseas/calendar.h"
#include "subseas/field.h"
#include "subseas/grid.h"

namespace subseas {

struct YearRange {
  int first = 0;
  int last = 0;  // inclusive
  bool contains(int y) const { return y >= first && y <= last; }
};

// Per (month-day, grid point) base-period mean of observations.
class Climatology {
 public:
  Climatology() = default;
  // `table` is [366 leap-calendar slots][G]; `has_slot` marks populated slots.
  Climatology(Grid grid, YearRange base, std::vector<double> table,
              std::vector<uint8_t> has_slot);

  const Grid& grid() const { return grid_; }
  YearRange base_period() const { return base_; }
  bool has(MonthDay md) const { return has_slot_[md.leap_index()] != 0; }
  // Feb 29 falls back to Feb 28 when the base period has no leap day.
  std::span<const double> at(MonthDay md) const;
  std::span<const double> at(CalendarDate d) const { return at(MonthDay::Of(d)); }

 private:
  Grid grid_;
  YearRange base_;
  std::vector<double> table_;
  std::vector<uint8_t> has_slot_;
};

// Throws DataError for an empty base period or when some month-day of the
// base-period calendar has no observation at some grid point.
Climatology build_climatology(const FieldSeries& obs, YearRange base);

// Base-period samples grouped per leap-calendar slot: samples[slot][g] lists
// the present values in date order.
std::vector<std::vector<std::vector<double>>> month_day_samples(
    const FieldSeries& obs, YearRange base);

enum class AggregateMode { kMean, kSum };

// Value at start date t is the mean or sum over [t, t+L-1]; any missing day in
// the window masks the output cell. Output dates are the input dates whose
// window fits inside the series.
FieldSeries aggregate_period(const FieldSeries& daily, AggregateMode mode,
                             int period_days);

}  // namespace subseas

#endif  // SUBSEAS_CLIMATOLOGY_H_
