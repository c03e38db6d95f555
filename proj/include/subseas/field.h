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

#ifndef SUBSEAS_FIELD_H_
#define SUBSEAS_FIELD_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "subseas/calendar.h"
#include "subseas/grid.h"

namespace subseas {

// Dense date-by-grid array of one variable with an explicit missing mask.
// Values of masked cells are unspecified (stored as NaN).
class FieldSeries {
 public:
  FieldSeries() = default;
  // `values` and `present` are row-major [date][point]. Throws DataError when
  // sizes disagree or dates are not strictly increasing.
  FieldSeries(Grid grid, std::vector<CalendarDate> dates,
              std::vector<double> values, std::vector<uint8_t> present,
              std::string units = "");
  // All cells present.
  static FieldSeries Dense(Grid grid, std::vector<CalendarDate> dates,
                           std::vector<double> values, std::string units = "");

  const Grid& grid() const { return grid_; }
  size_t num_dates() const { return dates_.size(); }
  size_t num_points() const { return grid_.size(); }
  bool empty() const { return dates_.empty(); }
  std::span<const CalendarDate> dates() const { return dates_; }
  CalendarDate date(size_t row) const { return dates_[row]; }
  const std::string& units() const { return units_; }

  std::optional<size_t> row_of(CalendarDate d) const;
  std::span<const double> row(size_t r) const {
    return {values_.data() + r * grid_.size(), grid_.size()};
  }
  std::span<const uint8_t> mask_row(size_t r) const {
    return {present_.data() + r * grid_.size(), grid_.size()};
  }
  bool present(size_t r, size_t g) const { return present_[r * grid_.size() + g] != 0; }
  double at(size_t r, size_t g) const { return values_[r * grid_.size() + g]; }
  bool row_complete(size_t r) const { return complete_[r] != 0; }

  // Row for `d` when every cell is present.
  std::optional<std::span<const double>> complete_row(CalendarDate d) const;

  std::span<const double> values() const { return values_; }
  std::span<const uint8_t> mask() const { return present_; }

  friend bool operator==(const FieldSeries& a, const FieldSeries& b);

 private:
  Grid grid_;
  std::vector<CalendarDate> dates_;
  std::vector<double> values_;
  std::vector<uint8_t> present_;
  std::vector<uint8_t> complete_;
  std::string units_;
  bool contiguous_ = false;
};

enum class Era : uint8_t { kReforecast, kForecast };
enum class EraSelector : uint8_t { kAny, kReforecast, kForecast };

std::string_view era_name(Era e);
Era parse_era(std::string_view s);  // throws DataError

// Member id used for deterministic (corrected) forecasts.
inline constexpr int kDeterministicMember = -1;

struct ForecastKey {
  CalendarDate issuance;
  int lead = 0;    // days
  int member = 0;  // >= 0 for ensemble members, -1 for deterministic output
  CalendarDate target() const { return issuance + lead; }
  friend auto operator<=>(const ForecastKey&, const ForecastKey&) = default;
  friend bool operator==(const ForecastKey&, const ForecastKey&) = default;
};

// Ensemble forecasts keyed by (issuance, lead, member).
class ForecastArchive {
 public:
  struct Entry {
    ForecastKey key;
    Era era = Era::kForecast;
  };

  class Builder {
   public:
    explicit Builder(Grid grid) : grid_(std::move(grid)) {}
    // Throws DataError when values.size() != G.
    void add(ForecastKey key, Era era, std::span<const double> values);
    // Throws DataError on duplicate keys or mixed eras within one
    // (issuance, lead) group.
    ForecastArchive build() &&;

   private:
    Grid grid_;
    std::vector<Entry> entries_;
    std::vector<double> values_;
  };

  ForecastArchive() = default;

  const Grid& grid() const { return grid_; }
  size_t size() const { return entries_.size(); }
  const Entry& entry(size_t i) const { return entries_[i]; }
  std::span<const double> values(size_t i) const {
    return {values_.data() + i * grid_.size(), grid_.size()};
  }

  std::optional<std::span<const double>> find(const ForecastKey& key) const;

  // Mean over members >= 0 at (issuance, lead); a deterministic-only group
  // yields its member -1 vector.
  std::optional<std::span<const double>> ensemble_mean(
      CalendarDate issuance, int lead,
      EraSelector era = EraSelector::kAny) const;
  // Members >= 0, ordered by member id.
  std::vector<std::span<const double>> members(CalendarDate issuance,
                                               int lead) const;
  std::optional<Era> era_of(CalendarDate issuance, int lead) const;

  // Distinct leads, ascending.
  std::span<const int> leads() const { return leads_; }
  std::optional<CalendarDate> first_issuance() const;
  std::optional<CalendarDate> last_issuance() const;

  friend bool operator==(const ForecastArchive& a, const ForecastArchive& b);

 private:
  struct Group {
    size_t begin = 0;
    size_t end = 0;
    size_t mean_row = 0;
    Era era = Era::kForecast;
    bool has_members = false;
  };
  static int64_t group_key(CalendarDate issuance, int lead) {
    return issuance.ordinal() * 4096 + lead;
  }
  const Group* group(CalendarDate issuance, int lead) const;

  Grid grid_;
  std::vector<Entry> entries_;
  std::vector<double> values_;
  std::vector<Group> groups_;
  std::unordered_map<int64_t, size_t> group_index_;
  std::vector<double> means_;
  std::vector<int> leads_;
};

}  // namespace subseas

#endif  // SUBSEAS_FIELD_H_
