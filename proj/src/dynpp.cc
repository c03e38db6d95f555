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
#include <charconv>
#include <cmath>
#include <string>

#include "subseas/correctors.h"
#include "subseas/error.h"

namespace subseas {
namespace {

constexpr int kDynppSpans[] = {0, 14, 28, 35};
constexpr int kDynppIssuances[] = {1, 7, 14, 28, 42};

std::vector<LeadSet> dynpp_lead_sets(const TaskSpec& task) {
  switch (task.horizon) {
    case Horizon::kWeeks34:
      return {LeadSet::Range(15, 15), LeadSet::Range(15, 22),
              LeadSet::Range(0, 29), LeadSet::Range(29, 29)};
    case Horizon::kWeeks56:
      return {LeadSet::Range(29, 29)};
    case Horizon::kWeeks12:
      return {LeadSet::Range(1, 1), LeadSet::Range(1, 8), LeadSet::Range(0, 29)};
  }
  return {};
}

int parse_lead(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    throw ConfigError("malformed lead '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<CalendarDate> training_index(CalendarDate t_star,
                                         const TaskSpec& task,
                                         const FieldSeries& obs) {
  const CalendarDate cutoff = t_star - task.training_gap();
  std::vector<CalendarDate> out;
  for (size_t r = 0; r < obs.num_dates() && obs.date(r) <= cutoff; ++r) {
    if (obs.row_complete(r)) out.push_back(obs.date(r));
  }
  return out;
}

std::vector<int64_t> window_offsets(const TaskSpec& task, int span,
                                    std::optional<int> years,
                                    int64_t max_offset) {
  int64_t upper = max_offset;
  if (years) {
    upper = std::min<int64_t>(
        upper, static_cast<int64_t>(std::ceil((*years + 1) * kDaysPerYear)));
  }
  std::vector<int64_t> out;
  for (int64_t off = task.training_gap(); off <= upper; ++off) {
    if (years && year_diff_offset(off) > *years) continue;
    if (day_diff_offset(off) <= span) out.push_back(off);
  }
  return out;
}

LeadSet LeadSet::Range(int first, int last) {
  LeadSet s;
  for (int l = first; l <= last; ++l) s.leads.push_back(l);
  return s;
}

LeadSet LeadSet::Parse(std::string_view text) {
  const size_t dash = text.find('-');
  if (dash == std::string_view::npos) {
    const int l = parse_lead(text);
    return Range(l, l);
  }
  const int a = parse_lead(text.substr(0, dash));
  const int b = parse_lead(text.substr(dash + 1));
  if (b < a) throw ConfigError("empty lead range '" + std::string(text) + "'");
  return Range(a, b);
}

std::string LeadSet::label() const {
  if (leads.empty()) return "";
  const bool contiguous = leads.back() - leads.front() + 1 ==
                          static_cast<int>(leads.size());
  if (leads.size() == 1) return std::to_string(leads.front());
  if (contiguous) {
    return std::to_string(leads.front()) + "-" + std::to_string(leads.back());
  }
  std::string out;
  for (size_t i = 0; i < leads.size(); ++i) {
    if (i) out += ";";
    out += std::to_string(leads[i]);
  }
  return out;
}

std::string DynppConfig::label() const {
  return "span=" + std::to_string(span) + ",issuances=" +
         std::to_string(issuances) + ",leads=" + leads.label();
}

std::vector<DynppConfig> dynpp_candidates(const TaskSpec& task) {
  std::vector<DynppConfig> out;
  for (const LeadSet& leads : dynpp_lead_sets(task)) {
    for (int d : kDynppIssuances) {
      for (int s : kDynppSpans) {
        out.push_back({s, d, leads, kDynppTrainingYears});
      }
    }
  }
  return out;
}

DynppConfig dynpp_default(const TaskSpec& task) {
  return {kDynppSpans[std::size(kDynppSpans) - 1], 1,
          LeadSet::Range(task.lead, task.lead), kDynppTrainingYears};
}

void validate_dynpp_config(const DynppConfig& cfg, const TaskSpec& task) {
  if (std::find(std::begin(kDynppSpans), std::end(kDynppSpans), cfg.span) ==
      std::end(kDynppSpans)) {
    throw ConfigError("Dynamical++ span " + std::to_string(cfg.span) +
                      " outside {0, 14, 28, 35}");
  }
  if (std::find(std::begin(kDynppIssuances), std::end(kDynppIssuances),
                cfg.issuances) == std::end(kDynppIssuances)) {
    throw ConfigError("Dynamical++ issuance count " + std::to_string(cfg.issuances) +
                      " outside {1, 7, 14, 28, 42}");
  }
  const auto sets = dynpp_lead_sets(task);
  if (std::find(sets.begin(), sets.end(), cfg.leads) == sets.end()) {
    throw ConfigError("Dynamical++ lead set " + cfg.leads.label() +
                      " not allowed for " + task.name());
  }
}

DynppModel::DynppModel(TaskSpec task, const ForecastArchive& archive,
                       const FieldSeries& obs)
    : task_(task), archive_(archive), obs_(obs) {
  if (!obs.empty() && archive.size() > 0 && !(obs.grid() == archive.grid())) {
    throw DataError("Dynamical++: observation and forecast grids differ");
  }
  int64_t start = INT64_MAX, end = INT64_MIN;
  if (!obs.empty()) {
    start = obs.dates().front().ordinal();
    end = obs.dates().back().ordinal();
  }
  if (auto f = archive.first_issuance()) start = std::min(start, f->ordinal());
  if (auto l = archive.last_issuance()) {
    const int max_lead = archive.leads().empty() ? 0 : archive.leads().back();
    end = std::max(end, l->ordinal() + max_lead);
  }
  if (start > end) {
    start = 0;
    end = -1;
  }
  // Room for t* beyond the data so a test date past the last observation
  // still has an axis slot.
  axis_start_ = start;
  axis_size_ = static_cast<size_t>(end - start + 1 + task.training_gap());
}

std::optional<size_t> DynppModel::axis_index(CalendarDate d) const {
  const int64_t off = d.ordinal() - axis_start_;
  if (off < 0 || off >= static_cast<int64_t>(axis_size_)) return std::nullopt;
  return static_cast<size_t>(off);
}

const std::vector<int64_t>& DynppModel::offsets(int span, int years) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const int64_t key = static_cast<int64_t>(span) * 100000 + years;
  auto& slot = offsets_[key];
  if (!slot) {
    slot = std::make_unique<std::vector<int64_t>>(
        window_offsets(task_, span, years, static_cast<int64_t>(axis_size_)));
  }
  return *slot;
}

const DynppModel::Ensemble& DynppModel::ensemble(int issuances,
                                                 const LeadSet& leads) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string key = std::to_string(issuances) + "|" + leads.label();
  auto& slot = ensembles_[key];
  if (slot) return *slot;

  const size_t G = archive_.grid().size();
  auto e = std::make_unique<Ensemble>();
  e->fbar.assign(axis_size_ * G, 0.0);
  e->fbar_ok.assign(axis_size_, 0);
  e->residual.assign(axis_size_ * G, 0.0);
  e->residual_ok.assign(axis_size_, 0);

  // Dense lookup of ensemble means per lead on the issuance axis.
  std::vector<std::vector<const double*>> em(leads.leads.size(),
                                             std::vector<const double*>(axis_size_, nullptr));
  for (size_t li = 0; li < leads.leads.size(); ++li) {
    for (size_t i = 0; i < axis_size_; ++i) {
      auto m = archive_.ensemble_mean(
          CalendarDate::FromOrdinal(axis_start_ + static_cast<int64_t>(i)),
          leads.leads[li]);
      if (m) em[li][i] = m->data();
    }
  }

  for (size_t t = 0; t < axis_size_; ++t) {
    double* out = e->fbar.data() + t * G;
    size_t cells = 0;
    for (int d = 1; d <= issuances; ++d) {
      const int64_t issuance = static_cast<int64_t>(t) - task_.lead - d + 1;
      if (issuance < 0) break;
      for (size_t li = 0; li < leads.leads.size(); ++li) {
        const double* v = em[li][static_cast<size_t>(issuance)];
        if (!v) continue;
        ++cells;
        for (size_t g = 0; g < G; ++g) out[g] += v[g];
      }
    }
    if (cells == 0) continue;
    for (size_t g = 0; g < G; ++g) out[g] /= static_cast<double>(cells);
    e->fbar_ok[t] = 1;
    auto y = obs_.complete_row(
        CalendarDate::FromOrdinal(axis_start_ + static_cast<int64_t>(t)));
    if (!y) continue;
    for (size_t g = 0; g < G; ++g) e->residual[t * G + g] = (*y)[g] - out[g];
    e->residual_ok[t] = 1;
  }
  slot = std::move(e);
  return *slot;
}

std::optional<std::vector<double>> DynppModel::try_forecast(
    const DynppConfig& cfg, CalendarDate t_star, const DataGuard& guard) const {
  try {
    return forecast(cfg, t_star, guard);
  } catch (const DataError&) {
    return std::nullopt;
  }
}

std::vector<double> DynppModel::forecast(const DynppConfig& cfg,
                                         CalendarDate t_star,
                                         const DataGuard& guard) const {
  if (cfg.issuances < 1 || cfg.leads.leads.empty()) {
    throw DomainError("Dynamical++ needs d* >= 1 and a non-empty lead set");
  }
  const size_t G = archive_.grid().size();
  const Ensemble& ens = ensemble(cfg.issuances, cfg.leads);
  const auto& offs = offsets(cfg.span, cfg.training_years);

  auto ti = axis_index(t_star);
  guard.forecast(t_star - task_.lead);
  if (!ti || !ens.fbar_ok[*ti]) {
    std::string missing;
    for (int d = 1; d <= cfg.issuances; ++d) {
      for (int l : cfg.leads.leads) {
        if (!missing.empty()) missing += ", ";
        missing += "(" + (t_star - (task_.lead + d - 1)).iso() + ", " +
                   std::to_string(l) + ")";
      }
    }
    throw DataError("Dynamical++: no ensemble forecast for " + t_star.iso() +
                    "; missing (issuance, lead): " + missing);
  }

  std::vector<double> offset(G, 0.0);
  size_t count = 0;
  for (int64_t off : offs) {
    const int64_t t = static_cast<int64_t>(*ti) - off;
    if (t < 0) break;
    const size_t ts = static_cast<size_t>(t);
    if (!ens.residual_ok[ts]) continue;
    const CalendarDate date = t_star - off;
    guard.obs(date);
    guard.forecast(date - task_.lead);
    const double* r = ens.residual.data() + ts * G;
    for (size_t g = 0; g < G; ++g) offset[g] += r[g];
    ++count;
  }
  if (count == 0) {
    throw DataError("Dynamical++: empty training window for " + t_star.iso() +
                    " (" + cfg.label() + ")");
  }
  std::vector<double> out(G);
  const double* f = ens.fbar.data() + *ti * G;
  for (size_t g = 0; g < G; ++g) {
    out[g] = f[g] + offset[g] / static_cast<double>(count);
  }
  return out;
}

std::vector<double> dynpp_forecast(const DynppConfig& cfg, const TaskSpec& task,
                                   const ForecastArchive& archive,
                                   const FieldSeries& obs, CalendarDate t_star,
                                   AccessAudit* audit) {
  DynppModel model(task, archive, obs);
  return model.forecast(cfg, t_star, DataGuard(AccessHorizon::For(task, t_star), audit));
}

}  // namespace subseas
