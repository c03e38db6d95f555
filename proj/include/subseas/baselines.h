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

#ifndef SUBSEAS_BASELINES_H_
#define SUBSEAS_BASELINES_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subseas/calendar.h"
#include "subseas/climatology.h"
#include "subseas/field.h"
#include "subseas/observable.h"
#include "subseas/task.h"

namespace subseas {

// Ensemble mean issued at t - l* for lead l*, by target date t.
FieldSeries raw_forecast_series(const TaskSpec& task, const ForecastArchive& archive,
                                EraSelector era = EraSelector::kAny);

// ---------------------------------------------------------------------------
// Operational mean debiasing

struct ReforecastProtocol {
  enum class Mode { kDayWindow, kExactMonthDay };
  Mode mode = Mode::kDayWindow;
  int lookback_years = 20;     // day-window mode: years Y*-lookback .. Y*-1
  int day_window = 6;          // day-window mode: +- days around the month-day
  YearRange hindcast{1999, 2010};  // exact month-day mode
  EraSelector era = EraSelector::kReforecast;
  // Raw forecast averaged over `issuance_count` issuances spaced by
  // `issuance_stride` days (lead grows so the target stays fixed).
  int issuance_count = 1;
  int issuance_stride = 1;
};

// Throws ConfigError on an inconsistent protocol.
void validate_protocol(const ReforecastProtocol& p);

// Past target dates the protocol matches against for target t*.
std::vector<CalendarDate> protocol_matches(const ReforecastProtocol& p,
                                           CalendarDate t_star);

// Raw forecast for t* under the protocol's issuance averaging. Throws
// DataError when no issuance is available.
std::vector<double> protocol_raw(const ReforecastProtocol& p, const TaskSpec& task,
                                 const ForecastArchive& archive, CalendarDate t_star,
                                 const DataGuard& guard);

// raw - mean(matched reforecasts) + mean(matched observations). Matches with
// either side unavailable or past the observation cutoff are skipped; none
// left is a DataError.
std::vector<double> operational_debias(const ReforecastProtocol& p,
                                       const TaskSpec& task,
                                       const ForecastArchive& archive,
                                       const FieldSeries& obs, CalendarDate t_star,
                                       const DataGuard& guard);

// ---------------------------------------------------------------------------
// Multimodel mean

inline constexpr int kMultimodelLookbackDays = 6;

// Mean over models of each model's most recent forecast for target t* issued
// within [t* - l* - lookback, t* - l*]. Models without one are skipped; all
// missing is a DataError. `used` receives the chosen issuance per model.
std::vector<double> multimodel_mean(std::span<const ForecastArchive* const> models,
                                    const TaskSpec& task, CalendarDate t_star,
                                    const DataGuard& guard,
                                    int lookback = kMultimodelLookbackDays,
                                    std::vector<std::optional<CalendarDate>>* used = nullptr);

// ---------------------------------------------------------------------------
// Quantile mapping

inline constexpr double kQuantileRankLow = 0.10;
inline constexpr double kQuantileRankHigh = 0.90;

// Sorted training forecasts and observations per (no-leap month-day, point).
class QuantileMapModel {
 public:
  QuantileMapModel() = default;
  QuantileMapModel(size_t points, std::vector<std::vector<double>> forecasts,
                   std::vector<std::vector<double>> observations);

  // Pairs (raw forecast, observation) at target dates t <= cutoff; Feb 29 is
  // pooled with Feb 28.
  static QuantileMapModel Fit(const FieldSeries& raw, const FieldSeries& obs,
                              CalendarDate cutoff);

  size_t points() const { return points_; }
  std::span<const double> forecasts(int noleap_day, size_t g) const {
    return fcst_[static_cast<size_t>(noleap_day) * points_ + g];
  }
  std::span<const double> observations(int noleap_day, size_t g) const {
    return obs_[static_cast<size_t>(noleap_day) * points_ + g];
  }

 private:
  size_t points_ = 0;
  std::vector<std::vector<double>> fcst_;  // [365 * G]
  std::vector<std::vector<double>> obs_;
};

// Single-sample mapping: rank of `raw` among `fcst`, clipped to [0.1, 0.9],
// then raw + Q_obs(r) - Q_fcst(r). Both samples sorted ascending.
double quantile_map_value(std::span<const double> fcst, std::span<const double> obs,
                          double raw);

std::vector<double> quantile_map(const QuantileMapModel& model,
                                 std::span<const double> raw, CalendarDate t_star,
                                 Variable variable);

// ---------------------------------------------------------------------------
// LOESS debiasing

inline constexpr double kLoessFraction = 0.1;
inline constexpr double kLoessMinForecast = 1e-6;
inline constexpr double kLoessMaxRatio = 10.0;

enum class LoessMode { kAdditive, kMultiplicative };

// Local linear regression of `values` on the index with tricube weights over
// the nearest round(fraction * n) points, no wraparound.
std::vector<double> loess_smooth(std::span<const double> values,
                                 double fraction = kLoessFraction);

struct LoessCorrection {
  LoessMode mode = LoessMode::kAdditive;
  size_t points = 0;
  std::vector<double> smoothed_obs;       // [365][G]
  std::vector<double> smoothed_forecast;  // [365][G]
  std::vector<double> correction;         // [365][G], difference or ratio
  double max_ratio = kLoessMaxRatio;
};

// Training rows strictly before `cutoff`. Throws DataError when some no-leap
// month-day has no (forecast, observation) pair at some point.
LoessCorrection loess_fit(const FieldSeries& obs, const FieldSeries& raw,
                          CalendarDate cutoff, LoessMode mode,
                          double max_ratio = kLoessMaxRatio);
std::vector<double> loess_apply(const LoessCorrection& corr,
                                std::span<const double> raw, CalendarDate t_star);

}  // namespace subseas

#endif  // SUBSEAS_BASELINES_H_
