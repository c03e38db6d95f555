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

#include <algorithm>
#include <string>
#include <vector>

#include "subseas/correctors.h"
#include "subseas/error.h"
#include "subseas/quantile.h"

namespace subseas {
namespace {

constexpr int kClimppSpans[] = {0, 1, 7, 10};
constexpr int kClimppYears = 29;

}  // namespace

std::string ClimppConfig::label() const {
  return "span=" + std::to_string(span) + ",years=" +
         (years ? std::to_string(*years) : std::string("all")) +
         ",loss=" + (loss == Loss::kRMSE ? "rmse" : "mse");
}

std::vector<ClimppConfig> climpp_candidates(const TaskSpec& task) {
  std::vector<ClimppConfig> out;
  if (task.variable == Variable::kPrecipitation) {
    for (int s : kClimppSpans) out.push_back({s, std::nullopt, Loss::kMSE});
    return out;
  }
  for (std::optional<int> y : {std::optional<int>(), std::optional<int>(kClimppYears)}) {
    for (int s : kClimppSpans) out.push_back({s, y, Loss::kRMSE});
  }
  return out;
}

ClimppConfig climpp_default(const TaskSpec& task) {
  const Loss loss = task.variable == Variable::kPrecipitation ? Loss::kMSE : Loss::kRMSE;
  return {kClimppSpans[std::size(kClimppSpans) - 1], std::nullopt, loss};
}

void validate_climpp_config(const ClimppConfig& cfg, const TaskSpec& task) {
  if (std::find(std::begin(kClimppSpans), std::end(kClimppSpans), cfg.span) ==
      std::end(kClimppSpans)) {
    throw ConfigError("Climatology++ span " + std::to_string(cfg.span) +
                      " outside {0, 1, 7, 10}");
  }
  if (task.variable == Variable::kPrecipitation) {
    if (cfg.loss != Loss::kMSE || cfg.years) {
      throw ConfigError("Climatology++ for precipitation uses MSE over all years");
    }
  } else {
    if (cfg.loss != Loss::kRMSE) {
      throw ConfigError("Climatology++ for temperature uses RMSE");
    }
    if (cfg.years && *cfg.years != kClimppYears) {
      throw ConfigError("Climatology++ training years must be 'all' or 29");
    }
  }
}

std::vector<double> climpp_forecast(const ClimppConfig& cfg, const TaskSpec& task,
                                    const FieldSeries& obs, CalendarDate t_star,
                                    const DataGuard& guard) {
  const size_t G = obs.num_points();
  if (obs.empty()) throw DataError("Climatology++: no observations");
  const int64_t max_offset = t_star - obs.dates().front();
  const auto offsets = window_offsets(task, cfg.span, cfg.years, max_offset);

  std::vector<std::vector<double>> samples(G);
  size_t dates = 0;
  for (int64_t off : offsets) {
    const CalendarDate t = t_star - off;
    auto r = obs.row_of(t);
    if (!r) continue;
    guard.obs(t);
    bool any = false;
    for (size_t g = 0; g < G; ++g) {
      if (!obs.present(*r, g)) continue;
      samples[g].push_back(obs.at(*r, g));
      any = true;
    }
    if (any) ++dates;
  }
  if (dates == 0) {
    throw DataError("Climatology++: empty training window for " + t_star.iso() +
                    " (" + cfg.label() + ")");
  }
  std::vector<double> out(G);
  for (size_t g = 0; g < G; ++g) {
    auto& s = samples[g];
    if (s.empty()) {
      throw DataError("Climatology++: no training value at grid point " +
                      std::to_string(g) + " for " + t_star.iso());
    }
    if (cfg.loss == Loss::kRMSE) {
      out[g] = median(s);
    } else {
      double acc = 0.0;
      for (double v : s) acc += v;
      out[g] = acc / static_cast<double>(s.size());
    }
  }
  return out;
}

std::vector<double> climpp_forecast(const ClimppConfig& cfg, const TaskSpec& task,
                                    const FieldSeries& obs, CalendarDate t_star,
                                    AccessAudit* audit) {
  return climpp_forecast(cfg, task, obs, t_star,
                         DataGuard(AccessHorizon::For(task, t_star), audit));
}

}  // namespace subseas
