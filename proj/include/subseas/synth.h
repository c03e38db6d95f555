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

#ifndef SUBSEAS_SYNTH_H_
#define SUBSEAS_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "subseas/calendar.h"
#include "subseas/field.h"
#include "subseas/task.h"

namespace subseas {

enum class BiasKind { kConstant, kSeasonal, kRegional, kMultiplicative };
std::string_view bias_kind_name(BiasKind k);
BiasKind parse_bias_kind(std::string_view s);  // throws ConfigError

struct BiasModel {
  BiasKind kind = BiasKind::kConstant;
  double offset = 0.0;             // constant b; mean of the seasonal form
  double seasonal_amplitude = 0.0; // seasonal: b + A cos(2 pi (doy - peak) / D)
  int seasonal_peak_day = 200;
  double north = 0.0;              // regional offsets by grid half
  double south = 0.0;
  double wet_factor = 1.0;         // multiplicative: north half
  double dry_factor = 1.0;         // multiplicative: south half
};

struct ScenarioConfig {
  Variable variable = Variable::kTemperature;
  int grid_rows = 4;
  int grid_cols = 5;
  double lat0 = 30.0;
  double lon0 = -120.0;
  double grid_step = 2.0;
  int first_year = 2000;
  int last_year = 2009;
  uint64_t seed = 1;

  double base_value = 15.0;       // temperature degC or precipitation mm
  double seasonal_amplitude = 10.0;
  double latitude_gradient = -0.5;  // per degree of latitude
  double anomaly_std = 2.0;       // stationary std of the AR(1) anomaly
  double period_ar = 0.7;         // anomaly autocorrelation at a 14-day lag
  double spatial_coherence = 0.5; // share of anomaly variance common to all points
  double noise = 1.0;             // sigma, white observation noise

  BiasModel bias;
  int members = 3;                // n
  double member_spread = 1.0;     // tau
  double rho = 0.8;               // forecast anomaly correlation knob
  double lead_decay = 0.0;        // rho_l = rho * exp(-lead_decay * l)
  std::vector<int> leads;         // empty = 0..29
  std::vector<int> issuance_weekdays;  // empty = daily; 0 = Monday
  int forecast_start_year = 0;    // issuances from this year are era "forecast"

  // Explanatory indices: slow AR(1) processes plus an 8-phase categorical
  // oscillation. `opportunity_strength` > 0 shrinks forecast errors when the
  // first index is positive.
  int explanatory_indices = 0;
  bool explanatory_phase = false;
  double opportunity_strength = 0.0;
};

// Throws ConfigError on invalid settings.
void validate_scenario(const ScenarioConfig& cfg);

struct ExplanatorySeries {
  std::vector<CalendarDate> dates;
  std::vector<std::string> names;
  std::vector<bool> categorical;
  std::vector<std::vector<double>> values;  // [variable][date]
};

struct Scenario {
  ScenarioConfig config;
  FieldSeries obs;
  ForecastArchive archive;
  FieldSeries truth_bias;  // injected ensemble-mean bias by target date
  ExplanatorySeries explanatory;
};

Scenario generate_scenario(const ScenarioConfig& cfg, int jobs = 1);

// Writes obs.csv, forecasts.csv, truth_bias.csv and, with explanatory
// series, explanatory.csv plus explanatory_manifest.json.
void write_scenario(const Scenario& s, const std::string& dir);

}  // namespace subseas

#endif  // SUBSEAS_SYNTH_H_
