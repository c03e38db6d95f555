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

#ifndef SUBSEAS_PIPELINE_H_
#define SUBSEAS_PIPELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "subseas/baselines.h"
#include "subseas/calendar.h"
#include "subseas/climatology.h"
#include "subseas/correctors.h"
#include "subseas/field.h"
#include "subseas/metrics.h"
#include "subseas/observable.h"
#include "subseas/task.h"

namespace subseas {

enum class ModelKind { kRaw, kDynpp, kClimpp, kPerpp, kAbc, kQm, kLoess, kOpdebias, kMmm };
std::string_view model_name(ModelKind m);
ModelKind parse_model(std::string_view s);  // throws ConfigError

struct PipelineInputs {
  TaskSpec task;
  const FieldSeries* obs = nullptr;
  const ForecastArchive* archive = nullptr;
  const Climatology* clim = nullptr;
  std::vector<const ForecastArchive*> models;  // multimodel mean members
  ReforecastProtocol opdebias;
  std::vector<DynppConfig> dynpp_grid;    // empty = full grid for the task
  std::vector<ClimppConfig> climpp_grid;  // empty = full grid for the task
  double tuner_years = kTunerWindowYears;
  bool probabilistic = false;
  AccessAudit* audit = nullptr;
  int jobs = 1;
};

struct TuningEntry {
  CalendarDate target;
  std::string component;  // "dynpp" or "climpp"
  std::string config;
  bool fallback = false;
  double mean_rmse = 0.0;
  size_t scored_dates = 0;
};

struct CorrectionRun {
  ModelKind model = ModelKind::kRaw;
  FieldSeries forecasts;  // by target date
  std::vector<TuningEntry> tuning;
  // Per output date, one distribution per grid point (probabilistic runs).
  std::vector<std::vector<EmpiricalDistribution>> ensembles;
  std::vector<std::string> warnings;
  // Fitted state worth serializing: the last Persistence++ fit and the
  // once-fitted baselines.
  std::optional<PerppCoefficients> perpp_last;
  std::optional<QuantileMapModel> qm;
  std::optional<LoessCorrection> loess;
};

// Target dates in [first, last] with a raw forecast (issued t - l* at lead
// l*); for the multimodel mean, dates where any model has one.
std::vector<CalendarDate> eval_dates(const PipelineInputs& in, ModelKind model,
                                     CalendarDate first, CalendarDate last);

// Progressive run: the forecast for each target uses only data observable at
// its issuance; tuned components pick hyperparameters per target.
CorrectionRun run_correction(const PipelineInputs& in, ModelKind model,
                             const std::vector<CalendarDate>& targets);

// Skill per target date of `forecasts` against `obs`.
std::vector<std::optional<double>> per_date_skill(const FieldSeries& forecasts,
                                                  const FieldSeries& obs,
                                                  const Climatology& clim);

}  // namespace subseas

#endif  // SUBSEAS_PIPELINE_H_
