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

#ifndef SUBSEAS_METRICS_H_
#define SUBSEAS_METRICS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "subseas/calendar.h"
#include "subseas/climatology.h"
#include "subseas/field.h"

namespace subseas {

// Uncentered anomaly correlation <yhat - c, y - c> / (|yhat - c| |y - c|).
// Undefined (nullopt) when either anomaly vector is identically zero.
std::optional<double> skill(std::span<const double> yhat,
                            std::span<const double> y,
                            std::span<const double> c);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
};

// Percentile bootstrap of the mean; deterministic given `seed`.
ConfidenceInterval bootstrap_ci(std::span<const double> values,
                                double level = 0.95, int resamples = 1000,
                                uint64_t seed = 0);

struct SkillSummary {
  std::vector<CalendarDate> dates;
  std::vector<std::optional<double>> skills;
  double mean = 0.0;
  size_t defined = 0;
  // DJF, MAM, JJA, SON; empty when a season has no defined date.
  std::array<std::optional<double>, 4> season_mean;
  std::array<size_t, 4> season_count{};
  std::optional<ConfidenceInterval> ci;
};

// Mean over defined per-date skills (undefined dates excluded), with
// per-season means. Throws DataError when no date is defined.
SkillSummary mean_skill(std::vector<CalendarDate> dates,
                        std::vector<std::optional<double>> skills);
// Same, plus a bootstrap CI of the mean.
SkillSummary mean_skill(std::vector<CalendarDate> dates,
                        std::vector<std::optional<double>> skills, double level,
                        int resamples, uint64_t seed);

// Per grid point anomaly correlation across the shared dates of `forecasts`
// and `obs`. Cells missing in either input are skipped.
std::vector<std::optional<double>> spatial_skill(const FieldSeries& forecasts,
                                                 const FieldSeries& obs,
                                                 const Climatology& clim);

// Fraction of defined points with value > threshold. Throws DataError when
// every point is undefined.
double fraction_above(std::span<const std::optional<double>> spatial,
                      double threshold);
std::vector<std::pair<double, double>> fraction_above_curve(
    std::span<const std::optional<double>> spatial,
    std::span<const double> thresholds);

// Per grid point mean of (forecast - observation) over shared dates. A point
// with no shared present cell yields NaN.
std::vector<double> bias_map(const FieldSeries& forecasts, const FieldSeries& obs);

enum class Loss { kRMSE, kMSE };
double geographic_loss(std::span<const double> yhat, std::span<const double> y,
                       Loss loss);

// Ensemble members of one (date, grid point), sorted ascending. The CDF is the
// right-continuous step function F(x) = #{members <= x} / n.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;
  // Throws DomainError when `members` is empty.
  explicit EmpiricalDistribution(std::vector<double> members);

  size_t size() const { return members_.size(); }
  std::span<const double> members() const { return members_; }
  double cdf(double x) const;
  double mean() const;

 private:
  std::vector<double> members_;
};

// mean|X_i - y| - 1/2 mean_{i,j}|X_i - X_j|.
double crps(const EmpiricalDistribution& dist, double y);

// 1 - mean_g (F_g(x_g) - 1{y_g <= x_g})^2 / mean_g (2/3 - 1{y_g <= x_g})^2.
double brier_skill_score(std::span<const EmpiricalDistribution> dists,
                         std::span<const double> y, std::span<const double> x);
// Same with the forecast probabilities F_g(x_g) given directly.
double brier_skill_score_from_probabilities(std::span<const double> prob,
                                            std::span<const double> y,
                                            std::span<const double> x);

// Second tercile of base-period observations per (month-day, grid point).
class TercileThresholds {
 public:
  TercileThresholds() = default;
  static TercileThresholds Build(const FieldSeries& obs, YearRange base);
  // Feb 29 falls back to Feb 28 when absent.
  std::span<const double> at(MonthDay md) const;
  std::span<const double> at(CalendarDate d) const { return at(MonthDay::Of(d)); }

 private:
  size_t points_ = 0;
  std::vector<double> table_;  // [366][G]
  std::vector<uint8_t> has_slot_;
};

}  // namespace subseas

#endif  // SUBSEAS_METRICS_H_
