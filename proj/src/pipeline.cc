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

#include "subseas/pipeline.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "subseas/error.h"
#include "subseas/log.h"
#include "subseas/parallel.h"

namespace subseas {
namespace {

using Vec = std::vector<double>;
using Forecaster = std::function<std::optional<Vec>(size_t, CalendarDate, const DataGuard&)>;

DataGuard guard_for(const PipelineInputs& in, CalendarDate t) {
  return DataGuard(AccessHorizon::For(in.task, t), in.audit);
}

struct Tuned {
  std::map<int64_t, Vec> output;  // by target ordinal
  std::vector<TuningEntry> entries;
  size_t fallbacks = 0;
  size_t failures = 0;
};

// Progressive tuning: score every candidate at past dates, then pick per
// target the best mean RMSE over the tuner window.
Tuned tune_component(const PipelineInputs& in, const std::string& component,
                     const std::vector<std::string>& labels, size_t fallback_index,
                     const Forecaster& forecast,
                     const std::vector<CalendarDate>& targets) {
  Tuned out;
  if (targets.empty()) return out;
  const FieldSeries& obs = *in.obs;
  const CalendarDate first =
      targets.front() - static_cast<int64_t>(std::floor(in.tuner_years * kDaysPerYear));
  const CalendarDate last = targets.back() - in.task.training_gap();
  std::vector<CalendarDate> scoring;
  for (size_t r = 0; r < obs.num_dates(); ++r) {
    const CalendarDate d = obs.date(r);
    if (d >= first && d <= last && obs.row_complete(r)) scoring.push_back(d);
  }
  const size_t C = labels.size();
  TuningRecord record(scoring, C);
  parallel_for(C, in.jobs, [&](size_t c) {
    for (size_t i = 0; i < scoring.size(); ++i) {
      const CalendarDate t = scoring[i];
      auto f = forecast(c, t, guard_for(in, t));
      if (!f) continue;
      auto y = *obs.complete_row(t);
      record.set(c, i, geographic_loss(*f, y, Loss::kRMSE));
    }
  });
  record.finalize();

  std::vector<std::optional<Vec>> results(targets.size());
  std::vector<TuneResult> picks(targets.size());
  parallel_for(targets.size(), in.jobs, [&](size_t k) {
    const DataGuard guard = guard_for(in, targets[k]);
    picks[k] = tune(record, targets[k], guard, fallback_index, in.tuner_years, false);
    results[k] = forecast(picks[k].index, targets[k], guard);
  });
  for (size_t k = 0; k < targets.size(); ++k) {
    out.entries.push_back({targets[k], component, labels[picks[k].index],
                           picks[k].fallback, picks[k].mean_rmse, picks[k].scored_dates});
    if (picks[k].fallback) ++out.fallbacks;
    if (results[k]) {
      out.output.emplace(targets[k].ordinal(), std::move(*results[k]));
    } else {
      ++out.failures;
    }
  }
  return out;
}

Tuned run_dynpp(const PipelineInputs& in, const std::vector<CalendarDate>& targets) {
  std::vector<DynppConfig> grid = in.dynpp_grid;
  if (grid.empty()) grid = dynpp_candidates(in.task);
  const DynppConfig def = dynpp_default(in.task);
  size_t fallback = std::find(grid.begin(), grid.end(), def) - grid.begin();
  if (fallback == grid.size()) fallback = 0;
  std::vector<std::string> labels;
  for (const auto& c : grid) labels.push_back(c.label());
  DynppModel model(in.task, *in.archive, *in.obs);
  Forecaster f = [&](size_t c, CalendarDate t, const DataGuard& g) {
    return model.try_forecast(grid[c], t, g);
  };
  return tune_component(in, "dynpp", labels, fallback, f, targets);
}

Tuned run_climpp(const PipelineInputs& in, const std::vector<CalendarDate>& targets) {
  std::vector<ClimppConfig> grid = in.climpp_grid;
  if (grid.empty()) grid = climpp_candidates(in.task);
  const ClimppConfig def = climpp_default(in.task);
  size_t fallback = std::find(grid.begin(), grid.end(), def) - grid.begin();
  if (fallback == grid.size()) fallback = 0;
  std::vector<std::string> labels;
  for (const auto& c : grid) labels.push_back(c.label());
  Forecaster f = [&](size_t c, CalendarDate t, const DataGuard& g) -> std::optional<Vec> {
    try {
      return climpp_forecast(grid[c], in.task, *in.obs, t, g);
    } catch (const DataError&) {
      return std::nullopt;
    }
  };
  return tune_component(in, "climpp", labels, fallback, f, targets);
}

std::map<int64_t, Vec> run_perpp(const PipelineInputs& in,
                                 const std::vector<CalendarDate>& targets,
                                 size_t* deficient, size_t* failures,
                                 std::optional<PerppCoefficients>* last) {
  PerppModel model(in.task, *in.archive, *in.obs, *in.clim);
  std::vector<std::optional<Vec>> out(targets.size());
  std::vector<std::optional<PerppCoefficients>> fits(targets.size());
  std::vector<uint8_t> rank_flag(targets.size(), 0);
  parallel_for(targets.size(), in.jobs, [&](size_t k) {
    const DataGuard guard = guard_for(in, targets[k]);
    try {
      const PerppCoefficients c = model.fit(targets[k], guard);
      rank_flag[k] = std::any_of(c.rank_deficient.begin(), c.rank_deficient.end(),
                                 [](uint8_t v) { return v != 0; });
      out[k] = model.predict(c, targets[k], guard);
      if (k + 1 == targets.size()) fits[k] = c;
    } catch (const DataError&) {
    }
  });
  if (!fits.empty() && fits.back()) *last = std::move(fits.back());
  std::map<int64_t, Vec> result;
  for (size_t k = 0; k < targets.size(); ++k) {
    if (rank_flag[k]) ++*deficient;
    if (out[k]) {
      result.emplace(targets[k].ordinal(), std::move(*out[k]));
    } else {
      ++*failures;
    }
  }
  return result;
}

template <typename Fn>
std::map<int64_t, Vec> run_simple(const PipelineInputs& in,
                                  const std::vector<CalendarDate>& targets,
                                  size_t* failures, Fn fn) {
  std::vector<std::optional<Vec>> out(targets.size());
  parallel_for(targets.size(), in.jobs, [&](size_t k) {
    try {
      out[k] = fn(targets[k], guard_for(in, targets[k]));
    } catch (const DataError&) {
    }
  });
  std::map<int64_t, Vec> result;
  for (size_t k = 0; k < targets.size(); ++k) {
    if (out[k]) {
      result.emplace(targets[k].ordinal(), std::move(*out[k]));
    } else {
      ++*failures;
    }
  }
  return result;
}

Vec raw_at(const PipelineInputs& in, CalendarDate t, const DataGuard& g) {
  const CalendarDate issuance = t - in.task.lead;
  g.forecast(issuance);
  auto m = in.archive->ensemble_mean(issuance, in.task.lead);
  if (!m) throw DataError("no raw forecast for " + t.iso());
  return Vec(m->begin(), m->end());
}

// Last date of `s` on or before `cutoff` (training-set upper end).
std::optional<CalendarDate> last_on_or_before(const FieldSeries& s, CalendarDate cutoff) {
  auto d = s.dates();
  auto it = std::upper_bound(d.begin(), d.end(), cutoff);
  if (it == d.begin()) return std::nullopt;
  return *(it - 1);
}

void note(CorrectionRun& run, const std::string& msg) {
  log::warn(msg);
  run.warnings.push_back(msg);
}

}  // namespace

std::string_view model_name(ModelKind m) {
  switch (m) {
    case ModelKind::kRaw:
      return "raw";
    case ModelKind::kDynpp:
      return "dynpp";
    case ModelKind::kClimpp:
      return "climpp";
    case ModelKind::kPerpp:
      return "perpp";
    case ModelKind::kAbc:
      return "abc";
    case ModelKind::kQm:
      return "qm";
    case ModelKind::kLoess:
      return "loess";
    case ModelKind::kOpdebias:
      return "opdebias";
    case ModelKind::kMmm:
      return "mmm";
  }
  return "raw";
}

ModelKind parse_model(std::string_view s) {
  for (ModelKind m : {ModelKind::kRaw, ModelKind::kDynpp, ModelKind::kClimpp,
                      ModelKind::kPerpp, ModelKind::kAbc, ModelKind::kQm,
                      ModelKind::kLoess, ModelKind::kOpdebias, ModelKind::kMmm}) {
    if (model_name(m) == s) return m;
  }
  throw ConfigError("unknown model '" + std::string(s) +
                    "' (expected raw, dynpp, climpp, perpp, abc, qm, loess, opdebias or mmm)");
}

std::vector<CalendarDate> eval_dates(const PipelineInputs& in, ModelKind model,
                                     CalendarDate first, CalendarDate last) {
  std::vector<CalendarDate> out;
  for (CalendarDate t = first; t <= last; t = t + 1) {
    bool ok = false;
    if (model == ModelKind::kMmm) {
      std::vector<const ForecastArchive*> models = in.models;
      if (models.empty()) models.push_back(in.archive);
      for (const ForecastArchive* a : models) {
        for (int back = 0; back <= kMultimodelLookbackDays && !ok; ++back) {
          const CalendarDate i = t - in.task.lead - back;
          ok = a->ensemble_mean(i, static_cast<int>(t - i)).has_value();
        }
        if (ok) break;
      }
    } else {
      ok = in.archive->ensemble_mean(t - in.task.lead, in.task.lead).has_value();
    }
    if (ok) out.push_back(t);
  }
  return out;
}

CorrectionRun run_correction(const PipelineInputs& in, ModelKind model,
                             const std::vector<CalendarDate>& targets_in) {
  if (!in.obs || !in.archive || !in.clim) throw DomainError("pipeline: missing inputs");
  std::vector<CalendarDate> targets = targets_in;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  CorrectionRun run;
  run.model = model;
  const TaskSpec& task = in.task;
  const size_t G = in.obs->num_points();
  std::map<int64_t, Vec> out;
  size_t failures = 0;

  auto absorb_tuned = [&](Tuned& t, const char* name) {
    for (auto& e : t.entries) run.tuning.push_back(std::move(e));
    if (t.fallbacks > 0) {
      note(run, std::string(name) + ": no scored tuning history for " +
                    std::to_string(t.fallbacks) +
                    " target(s); used the default configuration");
    }
  };

  std::map<int64_t, Vec> dyn, clim, per;
  switch (model) {
    case ModelKind::kRaw:
      out = run_simple(in, targets, &failures,
                       [&](CalendarDate t, const DataGuard& g) { return raw_at(in, t, g); });
      break;
    case ModelKind::kDynpp: {
      Tuned t = run_dynpp(in, targets);
      absorb_tuned(t, "Dynamical++");
      failures = t.failures;
      out = std::move(t.output);
      break;
    }
    case ModelKind::kClimpp: {
      Tuned t = run_climpp(in, targets);
      absorb_tuned(t, "Climatology++");
      failures = t.failures;
      out = std::move(t.output);
      break;
    }
    case ModelKind::kPerpp: {
      size_t deficient = 0;
      out = run_perpp(in, targets, &deficient, &failures, &run.perpp_last);
      if (deficient > 0) {
        note(run, "Persistence++: rank-deficient design for " + std::to_string(deficient) +
                      " target(s); used the minimum-norm solution");
      }
      break;
    }
    case ModelKind::kAbc: {
      Tuned d = run_dynpp(in, targets);
      absorb_tuned(d, "Dynamical++");
      dyn = std::move(d.output);
      const bool with_clim = task.horizon != Horizon::kWeeks12;
      if (with_clim || in.probabilistic) {
        Tuned c = run_climpp(in, targets);
        absorb_tuned(c, "Climatology++");
        clim = std::move(c.output);
      }
      size_t deficient = 0, perpp_fail = 0;
      per = run_perpp(in, targets, &deficient, &perpp_fail, &run.perpp_last);
      if (deficient > 0) {
        note(run, "Persistence++: rank-deficient design for " + std::to_string(deficient) +
                      " target(s); used the minimum-norm solution");
      }
      for (CalendarDate t : targets) {
        const int64_t k = t.ordinal();
        AbcComponents parts;
        if (auto it = dyn.find(k); it != dyn.end()) parts.dynpp = it->second;
        if (auto it = clim.find(k); it != clim.end()) parts.climpp = it->second;
        if (auto it = per.find(k); it != per.end()) parts.perpp = it->second;
        try {
          out.emplace(k, abc_forecast(task, parts));
        } catch (const DataError&) {
          ++failures;
        }
      }
      break;
    }
    case ModelKind::kQm:
    case ModelKind::kLoess: {
      if (targets.empty()) break;
      const FieldSeries raw = raw_forecast_series(task, *in.archive);
      const DataGuard first = guard_for(in, targets.front());
      const CalendarDate cutoff = first.horizon().obs_cutoff;
      if (auto d = last_on_or_before(raw, cutoff)) {
        first.obs(*d);
        first.forecast(*d - task.lead);
      }
      if (model == ModelKind::kQm) {
        run.qm = QuantileMapModel::Fit(raw, *in.obs, cutoff);
        const QuantileMapModel& qm = *run.qm;
        out = run_simple(in, targets, &failures, [&](CalendarDate t, const DataGuard& g) {
          return quantile_map(qm, raw_at(in, t, g), t, task.variable);
        });
      } else {
        const LoessMode mode = task.variable == Variable::kPrecipitation
                                   ? LoessMode::kMultiplicative
                                   : LoessMode::kAdditive;
        run.loess = loess_fit(*in.obs, raw, cutoff + 1, mode);
        const LoessCorrection& corr = *run.loess;
        out = run_simple(in, targets, &failures, [&](CalendarDate t, const DataGuard& g) {
          return loess_apply(corr, raw_at(in, t, g), t);
        });
      }
      break;
    }
    case ModelKind::kOpdebias:
      validate_protocol(in.opdebias);
      out = run_simple(in, targets, &failures, [&](CalendarDate t, const DataGuard& g) {
        return operational_debias(in.opdebias, task, *in.archive, *in.obs, t, g);
      });
      break;
    case ModelKind::kMmm: {
      if (in.probabilistic) {
        throw ConfigError("probabilistic output is not available for the multimodel mean");
      }
      std::vector<const ForecastArchive*> models = in.models;
      if (models.empty()) models.push_back(in.archive);
      out = run_simple(in, targets, &failures, [&](CalendarDate t, const DataGuard& g) {
        return multimodel_mean(models, task, t, g);
      });
      break;
    }
  }
  if (failures > 0) {
    note(run, std::string(model_name(model)) + ": no forecast for " +
                  std::to_string(failures) + " of " + std::to_string(targets.size()) +
                  " target date(s)");
  }

  std::vector<CalendarDate> dates;
  Vec values;
  dates.reserve(out.size());
  values.reserve(out.size() * G);
  for (auto& [k, v] : out) {
    dates.push_back(CalendarDate::FromOrdinal(k));
    values.insert(values.end(), v.begin(), v.end());
  }
  run.forecasts = FieldSeries::Dense(in.obs->grid(), dates, std::move(values),
                                     in.obs->units());

  if (in.probabilistic) {
    run.ensembles.resize(dates.size());
    for (size_t r = 0; r < dates.size(); ++r) {
      const CalendarDate t = dates[r];
      const CalendarDate issuance = t - task.lead;
      const auto members = in.archive->members(issuance, task.lead);
      auto em = in.archive->ensemble_mean(issuance, task.lead);
      const auto det = run.forecasts.row(r);
      if (model == ModelKind::kClimpp) {
        for (size_t g = 0; g < G; ++g) run.ensembles[r].emplace_back(Vec{det[g]});
        continue;
      }
      if (members.empty() || !em) {
        throw DataError("probabilistic output needs ensemble members at " + issuance.iso());
      }
      if (model == ModelKind::kAbc) {
        const int64_t k = t.ordinal();
        const Vec& d = dyn.at(k);
        const Vec& p = per.at(k);
        auto c = clim.find(k);
        if (c != clim.end()) {
          run.ensembles[r] =
              abc_probabilistic(members, d, p, c->second, *em, task.variable);
        } else {
          // No Climatology++ member available: pool the two corrected sets.
          const CorrectedMembers cm = abc_member_corrections(members, d, p, d, *em);
          for (size_t g = 0; g < G; ++g) {
            Vec pool;
            for (const auto& m : cm.dyn) pool.push_back(m[g]);
            for (const auto& m : cm.per) pool.push_back(m[g]);
            if (task.variable == Variable::kPrecipitation) {
              for (double& v : pool) v = std::max(v, 0.0);
            }
            run.ensembles[r].emplace_back(std::move(pool));
          }
        }
      } else {
        run.ensembles[r] = baseline_probabilistic(members, det, *em, task.variable);
      }
    }
  }
  return run;
}

std::vector<std::optional<double>> per_date_skill(const FieldSeries& forecasts,
                                                  const FieldSeries& obs,
                                                  const Climatology& clim) {
  std::vector<std::optional<double>> out(forecasts.num_dates());
  for (size_t r = 0; r < forecasts.num_dates(); ++r) {
    const CalendarDate d = forecasts.date(r);
    auto y = obs.complete_row(d);
    if (!y) continue;
    bool complete = true;
    for (size_t g = 0; g < forecasts.num_points() && complete; ++g) {
      complete = forecasts.present(r, g);
    }
    if (!complete) continue;
    out[r] = skill(forecasts.row(r), *y, clim.at(d));
  }
  return out;
}

}  // namespace subseas
