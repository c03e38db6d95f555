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

#ifndef SUBSEAS_CORRECTORS_H_
#define SUBSEAS_CORRECTORS_H_

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "subseas/calendar.h"
#include "subseas/climatology.h"
#include "subseas/field.h"
#include "subseas/metrics.h"
#include "subseas/observable.h"
#include "subseas/task.h"

namespace subseas {

// ---------------------------------------------------------------------------
// Training windows

// Complete observation dates t <= t* - l* - L - 1.
std::vector<CalendarDate> training_index(CalendarDate t_star,
                                         const TaskSpec& task,
                                         const FieldSeries& obs);

// Offsets t* - t (ascending) admitted by a day-of-year window of half-width
// `span` days within `years` training years (nullopt = no year limit), past
// the observability gap, and not larger than `max_offset`.
std::vector<int64_t> window_offsets(const TaskSpec& task, int span,
                                    std::optional<int> years,
                                    int64_t max_offset);

// ---------------------------------------------------------------------------
// Dynamical++

// Ensemble lead set, e.g. {15}, [15, 22], [0, 29].
struct LeadSet {
  std::vector<int> leads;

  static LeadSet Range(int first, int last);
  // "15" or "15-22".
  static LeadSet Parse(std::string_view text);
  std::string label() const;
  friend bool operator==(const LeadSet&, const LeadSet&) = default;
};

inline constexpr int kDynppTrainingYears = 12;

struct DynppConfig {
  int span = 0;        // s, days on each side of the target day of year
  int issuances = 1;   // d*
  LeadSet leads;       // L set
  int training_years = kDynppTrainingYears;

  std::string label() const;
  friend bool operator==(const DynppConfig&, const DynppConfig&) = default;
};

// Hyperparameter grid searched by the tuner for `task`.
std::vector<DynppConfig> dynpp_candidates(const TaskSpec& task);
// Widest span, d* = 1, leads {l*}.
DynppConfig dynpp_default(const TaskSpec& task);
// Throws ConfigError when `cfg` is outside the grid for `task`.
void validate_dynpp_config(const DynppConfig& cfg, const TaskSpec& task);

// Holds, per (d*, lead set), the ensembled forecast f_bar_t on a dense day
// axis so repeated progressive forecasts only pay for the window mean.
class DynppModel {
 public:
  DynppModel(TaskSpec task, const ForecastArchive& archive,
             const FieldSeries& obs);

  // f_bar_{t*} + mean over S of (y_t - f_bar_t). Throws DataError when S is
  // empty or no ensembling cell exists for t* (message lists missing keys).
  std::vector<double> forecast(const DynppConfig& cfg, CalendarDate t_star,
                               const DataGuard& guard) const;
  // nullopt instead of DataError.
  std::optional<std::vector<double>> try_forecast(const DynppConfig& cfg,
                                                  CalendarDate t_star,
                                                  const DataGuard& guard) const;

  const TaskSpec& task() const { return task_; }

 private:
  struct Ensemble {
    std::vector<double> fbar;       // [axis][G]
    std::vector<uint8_t> fbar_ok;
    std::vector<double> residual;   // y_t - f_bar_t
    std::vector<uint8_t> residual_ok;
  };
  const Ensemble& ensemble(int issuances, const LeadSet& leads) const;
  const std::vector<int64_t>& offsets(int span, int years) const;
  std::optional<size_t> axis_index(CalendarDate d) const;

  TaskSpec task_;
  const ForecastArchive& archive_;
  const FieldSeries& obs_;
  int64_t axis_start_ = 0;
  size_t axis_size_ = 0;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::unique_ptr<Ensemble>> ensembles_;
  mutable std::unordered_map<int64_t, std::unique_ptr<std::vector<int64_t>>> offsets_;
};

std::vector<double> dynpp_forecast(const DynppConfig& cfg, const TaskSpec& task,
                                   const ForecastArchive& archive,
                                   const FieldSeries& obs, CalendarDate t_star,
                                   AccessAudit* audit = nullptr);

// ---------------------------------------------------------------------------
// Climatology++

struct ClimppConfig {
  int span = 0;
  std::optional<int> years;  // nullopt = all available training years
  Loss loss = Loss::kRMSE;

  std::string label() const;
  friend bool operator==(const ClimppConfig&, const ClimppConfig&) = default;
};

std::vector<ClimppConfig> climpp_candidates(const TaskSpec& task);
ClimppConfig climpp_default(const TaskSpec& task);
void validate_climpp_config(const ClimppConfig& cfg, const TaskSpec& task);

// Per grid point median (RMSE) or mean (MSE) of observations over the window
// S around the target day of year. Throws DataError when S is empty.
std::vector<double> climpp_forecast(const ClimppConfig& cfg, const TaskSpec& task,
                                    const FieldSeries& obs, CalendarDate t_star,
                                    const DataGuard& guard);
std::vector<double> climpp_forecast(const ClimppConfig& cfg, const TaskSpec& task,
                                    const FieldSeries& obs, CalendarDate t_star,
                                    AccessAudit* audit = nullptr);

// ---------------------------------------------------------------------------
// Persistence++

inline constexpr int kPerppRegressors = 5;
inline constexpr int kPerppMaxLead = 29;

using PerppRow = std::array<double, kPerppRegressors>;

struct PerppCoefficients {
  CalendarDate fitted_for;
  std::vector<PerppRow> beta;          // per grid point
  std::vector<uint8_t> rank_deficient; // per grid point
  std::vector<size_t> rows;            // training rows per grid point
};

// Minimum-norm least-squares solution of X beta ~= y (complete orthogonal
// decomposition). Sets *rank_deficient when rank(X) < cols.
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y,
                                    bool* rank_deficient = nullptr);

// Per-grid-point OLS of y_t on [1, c_t, y_{t-l*-L-1}, y_{t-2l*-L-1},
// f_bar_{t-l*-1}], f_bar the mean over leads l* <= l <= 29 issued on the
// given date.
class PerppModel {
 public:
  PerppModel(TaskSpec task, const ForecastArchive& archive,
             const FieldSeries& obs, const Climatology& clim);

  // Throws DataError when some grid point has fewer than 5 training rows.
  PerppCoefficients fit(CalendarDate t_star, const DataGuard& guard) const;
  // Throws DataError when a regressor is unavailable at t*.
  std::vector<double> predict(const PerppCoefficients& coeffs,
                              CalendarDate t_star, const DataGuard& guard) const;
  // Regressor vector for target date t at grid point g.
  std::optional<PerppRow> regressors(CalendarDate t, size_t g) const;

 private:
  std::optional<std::span<const double>> forecast_mean(CalendarDate issuance) const;

  TaskSpec task_;
  const ForecastArchive& archive_;
  const FieldSeries& obs_;
  const Climatology& clim_;
  int64_t fbar_start_ = 0;
  std::vector<double> fbar_;  // [issuance axis][G]
  std::vector<uint8_t> fbar_ok_;
};

PerppCoefficients perpp_fit(const TaskSpec& task, const ForecastArchive& archive,
                            const FieldSeries& obs, const Climatology& clim,
                            CalendarDate t_star, AccessAudit* audit = nullptr);
std::vector<double> perpp_predict(const PerppCoefficients& coeffs,
                                  const TaskSpec& task,
                                  const ForecastArchive& archive,
                                  const FieldSeries& obs,
                                  const Climatology& clim, CalendarDate t_star,
                                  AccessAudit* audit = nullptr);

// ---------------------------------------------------------------------------
// Progressive tuning

inline constexpr double kTunerWindowYears = 3.0;

// Geographic RMSE of each candidate's progressive forecast per past target
// date (NaN = not scorable), with prefix sums for window queries.
class TuningRecord {
 public:
  TuningRecord(std::vector<CalendarDate> dates, size_t candidates);

  void set(size_t candidate, size_t date_index, double rmse);
  // Must be called after the last set() and before window queries.
  void finalize();

  size_t candidates() const { return sum_.size(); }
  std::span<const CalendarDate> dates() const { return dates_; }
  double rmse(size_t candidate, size_t date_index) const {
    return rmse_[candidate][date_index];
  }
  // Sum and count of defined scores over date indices [begin, end).
  std::pair<double, size_t> window(size_t candidate, size_t begin, size_t end) const;

 private:
  std::vector<CalendarDate> dates_;
  std::vector<std::vector<double>> rmse_;
  std::vector<std::vector<double>> sum_;
  std::vector<std::vector<uint32_t>> count_;
  bool finalized_ = false;
};

struct TuneResult {
  size_t index = 0;
  bool fallback = false;
  double mean_rmse = 0.0;
  size_t scored_dates = 0;
};

// Candidate with the smallest mean RMSE over scored target dates t with
// t* - 3D <= t <= observation cutoff; ties keep the earlier candidate. With no
// scored history returns `fallback_index` and, if `warn`, logs a warning.
TuneResult tune(const TuningRecord& record, CalendarDate t_star,
                const DataGuard& guard, size_t fallback_index,
                double window_years = kTunerWindowYears, bool warn = true);

// ---------------------------------------------------------------------------
// ABC ensemble and probabilistic forecasts

struct AbcComponents {
  std::optional<std::vector<double>> dynpp;
  std::optional<std::vector<double>> climpp;
  std::optional<std::vector<double>> perpp;
};

// Mean of Dynamical++, Climatology++ and Persistence++; Climatology++ is left
// out for weeks 1-2. Throws DataError when a required component is missing.
std::vector<double> abc_forecast(const TaskSpec& task, const AbcComponents& parts);

struct CorrectedMembers {
  std::vector<std::vector<double>> dyn;  // [member][G]
  std::vector<std::vector<double>> per;  // [member][G]
  std::vector<double> climpp;            // [G]
};

// member + deterministic - ensemble_mean for each member and correction
// source, before precipitation clipping.
CorrectedMembers abc_member_corrections(
    std::span<const std::span<const double>> members,
    std::span<const double> dynpp, std::span<const double> perpp,
    std::span<const double> climpp, std::span<const double> ensemble_mean);

// Pooled 2n+1 member distribution per grid point; precipitation clipped at 0.
std::vector<EmpiricalDistribution> abc_probabilistic(
    std::span<const std::span<const double>> members,
    std::span<const double> dynpp, std::span<const double> perpp,
    std::span<const double> climpp, std::span<const double> ensemble_mean,
    Variable variable);

// n member distribution per grid point shifted by deterministic - mean.
std::vector<EmpiricalDistribution> baseline_probabilistic(
    std::span<const std::span<const double>> members,
    std::span<const double> deterministic, std::span<const double> ensemble_mean,
    Variable variable);

}  // namespace subseas

#endif  // SUBSEAS_CORRECTORS_H_
