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

#include "subseas/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "subseas/error.h"
#include "subseas/quantile.h"

namespace subseas {
namespace {

constexpr int kNoleapDays = 365;

// Month-day of t* in year y, Feb 29 mapped onto Feb 28 outside leap years.
CalendarDate same_month_day(int year, MonthDay md) {
  if (md.is_feb29()) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (!leap) return CalendarDate(year, 2, 28);
  }
  return CalendarDate(year, md.month, md.day);
}

}  // namespace

FieldSeries raw_forecast_series(const TaskSpec& task, const ForecastArchive& archive,
                                EraSelector era) {
  std::vector<CalendarDate> dates;
  std::vector<double> values;
  auto first = archive.first_issuance();
  auto last = archive.last_issuance();
  if (first) {
    for (CalendarDate i = *first; i <= *last; i = i + 1) {
      auto m = archive.ensemble_mean(i, task.lead, era);
      if (!m) continue;
      dates.push_back(i + task.lead);
      values.insert(values.end(), m->begin(), m->end());
    }
  }
  return FieldSeries::Dense(archive.grid(), std::move(dates), std::move(values));
}

void validate_protocol(const ReforecastProtocol& p) {
  if (p.mode == ReforecastProtocol::Mode::kDayWindow) {
    if (p.lookback_years < 1) throw ConfigError("opdebias lookback_years must be >= 1");
    if (p.day_window < 0) throw ConfigError("opdebias day_window must be >= 0");
  } else if (p.hindcast.first > p.hindcast.last) {
    throw ConfigError("opdebias hindcast year range is empty");
  }
  if (p.issuance_count < 1 || p.issuance_stride < 1) {
    throw ConfigError("opdebias issuance count and stride must be >= 1");
  }
}

std::vector<CalendarDate> protocol_matches(const ReforecastProtocol& p,
                                           CalendarDate t_star) {
  const MonthDay md = MonthDay::Of(t_star);
  std::vector<CalendarDate> out;
  if (p.mode == ReforecastProtocol::Mode::kExactMonthDay) {
    for (int y = p.hindcast.first; y <= p.hindcast.last; ++y) {
      out.push_back(same_month_day(y, md));
    }
    return out;
  }
  for (int y = t_star.year() - p.lookback_years; y < t_star.year(); ++y) {
    const CalendarDate centre = same_month_day(y, md);
    for (int k = -p.day_window; k <= p.day_window; ++k) out.push_back(centre + k);
  }
  return out;
}

std::vector<double> protocol_raw(const ReforecastProtocol& p, const TaskSpec& task,
                                 const ForecastArchive& archive, CalendarDate t_star,
                                 const DataGuard& guard) {
  const size_t G = archive.grid().size();
  std::vector<double> out(G, 0.0);
  size_t n = 0;
  for (int k = 0; k < p.issuance_count; ++k) {
    const int lead = task.lead + k * p.issuance_stride;
    const CalendarDate issuance = t_star - lead;
    auto m = archive.ensemble_mean(issuance, lead);
    if (!m) continue;
    guard.forecast(issuance);
    for (size_t g = 0; g < G; ++g) out[g] += (*m)[g];
    ++n;
  }
  if (n == 0) {
    throw DataError("no raw forecast for target " + t_star.iso() + " at lead " +
                    std::to_string(task.lead));
  }
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

std::vector<double> operational_debias(const ReforecastProtocol& p,
                                       const TaskSpec& task,
                                       const ForecastArchive& archive,
                                       const FieldSeries& obs, CalendarDate t_star,
                                       const DataGuard& guard) {
  validate_protocol(p);
  const std::vector<double> raw = protocol_raw(p, task, archive, t_star, guard);
  const size_t G = raw.size();
  std::vector<double> ref(G, 0.0), truth(G, 0.0);
  size_t matched = 0;
  for (CalendarDate t : protocol_matches(p, t_star)) {
    if (!guard.obs_allowed(t)) continue;
    auto y = obs.complete_row(t);
    if (!y) continue;
    auto f = archive.ensemble_mean(t - task.lead, task.lead, p.era);
    if (!f) continue;
    guard.obs(t);
    guard.forecast(t - task.lead);
    for (size_t g = 0; g < G; ++g) {
      ref[g] += (*f)[g];
      truth[g] += (*y)[g];
    }
    ++matched;
  }
  if (matched == 0) {
    throw DataError("operational debiasing: no matched reforecast dates for " +
                    t_star.iso());
  }
  std::vector<double> out(G);
  const double n = static_cast<double>(matched);
  for (size_t g = 0; g < G; ++g) out[g] = raw[g] - ref[g] / n + truth[g] / n;
  return out;
}

std::vector<double> multimodel_mean(std::span<const ForecastArchive* const> models,
                                    const TaskSpec& task, CalendarDate t_star,
                                    const DataGuard& guard, int lookback,
                                    std::vector<std::optional<CalendarDate>>* used) {
  if (models.empty()) throw DataError("multimodel mean: no models");
  const CalendarDate cutoff = t_star - task.lead;
  std::vector<double> out;
  size_t contributing = 0;
  if (used) used->assign(models.size(), std::nullopt);
  for (size_t k = 0; k < models.size(); ++k) {
    const ForecastArchive& a = *models[k];
    for (int back = 0; back <= lookback; ++back) {
      const CalendarDate issuance = cutoff - back;
      auto m = a.ensemble_mean(issuance, static_cast<int>(t_star - issuance));
      if (!m) continue;
      guard.forecast(issuance);
      if (out.empty()) out.assign(m->size(), 0.0);
      if (m->size() != out.size()) throw DataError("multimodel mean: grids differ");
      for (size_t g = 0; g < out.size(); ++g) out[g] += (*m)[g];
      ++contributing;
      if (used) (*used)[k] = issuance;
      break;
    }
  }
  if (contributing == 0) {
    throw DataError("multimodel mean: no model has a forecast for " + t_star.iso() +
                    " within the lookback window");
  }
  for (double& v : out) v /= static_cast<double>(contributing);
  return out;
}

QuantileMapModel::QuantileMapModel(size_t points,
                                   std::vector<std::vector<double>> forecasts,
                                   std::vector<std::vector<double>> observations)
    : points_(points), fcst_(std::move(forecasts)), obs_(std::move(observations)) {
  if (fcst_.size() != kNoleapDays * points_ || obs_.size() != fcst_.size()) {
    throw DomainError("quantile map: expected 365 x G sample lists");
  }
  for (auto& s : fcst_) std::sort(s.begin(), s.end());
  for (auto& s : obs_) std::sort(s.begin(), s.end());
}

QuantileMapModel QuantileMapModel::Fit(const FieldSeries& raw, const FieldSeries& obs,
                                       CalendarDate cutoff) {
  const size_t G = obs.num_points();
  if (raw.num_points() != G) throw DataError("quantile map: grids differ");
  std::vector<std::vector<double>> f(kNoleapDays * G), o(kNoleapDays * G);
  for (size_t r = 0; r < raw.num_dates() && raw.date(r) <= cutoff; ++r) {
    auto ro = obs.row_of(raw.date(r));
    if (!ro) continue;
    const size_t slot = static_cast<size_t>(MonthDay::Of(raw.date(r)).noleap_index());
    for (size_t g = 0; g < G; ++g) {
      if (!raw.present(r, g) || !obs.present(*ro, g)) continue;
      f[slot * G + g].push_back(raw.at(r, g));
      o[slot * G + g].push_back(obs.at(*ro, g));
    }
  }
  return QuantileMapModel(G, std::move(f), std::move(o));
}

double quantile_map_value(std::span<const double> fcst, std::span<const double> obs,
                          double raw) {
  if (fcst.empty() || obs.empty()) throw DataError("quantile map: empty training sample");
  const double r = std::clamp(quantile_rank_sorted(fcst, raw), kQuantileRankLow,
                              kQuantileRankHigh);
  return raw + quantile_sorted(obs, r) - quantile_sorted(fcst, r);
}

std::vector<double> quantile_map(const QuantileMapModel& model,
                                 std::span<const double> raw, CalendarDate t_star,
                                 Variable variable) {
  const size_t G = model.points();
  if (raw.size() != G) throw DomainError("quantile map: raw forecast length mismatch");
  const int slot = MonthDay::Of(t_star).noleap_index();
  std::vector<double> out(G);
  for (size_t g = 0; g < G; ++g) {
    auto f = model.forecasts(slot, g);
    auto o = model.observations(slot, g);
    if (f.empty() || o.empty()) {
      throw DataError("quantile map: no training sample for " + t_star.iso() +
                      " at grid point " + std::to_string(g));
    }
    out[g] = quantile_map_value(f, o, raw[g]);
    if (variable == Variable::kPrecipitation) out[g] = std::max(out[g], 0.0);
  }
  return out;
}

std::vector<double> loess_smooth(std::span<const double> values, double fraction) {
  const size_t n = values.size();
  if (n == 0) return {};
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("LOESS fraction must be in (0, 1]");
  const size_t k = std::clamp<size_t>(
      static_cast<size_t>(std::lround(fraction * static_cast<double>(n))), 2, n);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    // Nearest k indices: a contiguous block [lo, lo + k) containing i.
    size_t lo = i >= k / 2 ? i - k / 2 : 0;
    if (lo + k > n) lo = n - k;
    // Shift toward the side with closer points when the block is asymmetric.
    while (lo > 0 && i - (lo - 1) < (lo + k - 1) - i) --lo;
    while (lo + k < n && (lo + k) - i < i - lo) ++lo;
    const size_t hi = lo + k;  // exclusive
    double h = std::max<double>(static_cast<double>(i - lo),
                                static_cast<double>(hi - 1 - i));
    if (h == 0.0) h = 1.0;
    // Weighted least squares of values on (j - i).
    double sw = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (size_t j = lo; j < hi; ++j) {
      const double x = static_cast<double>(j) - static_cast<double>(i);
      const double u = std::fabs(x) / h;
      const double w = u >= 1.0 ? 0.0 : std::pow(1.0 - u * u * u, 3);
      sw += w;
      sx += w * x;
      sxx += w * x * x;
      sy += w * values[j];
      sxy += w * x * values[j];
    }
    const double det = sw * sxx - sx * sx;
    if (std::fabs(det) <= 1e-12 * std::max(1.0, sw * sxx)) {
      out[i] = sy / sw;
    } else {
      out[i] = (sxx * sy - sx * sxy) / det;  // intercept at x = 0
    }
  }
  return out;
}

LoessCorrection loess_fit(const FieldSeries& obs, const FieldSeries& raw,
                          CalendarDate cutoff, LoessMode mode, double max_ratio) {
  const size_t G = obs.num_points();
  if (raw.num_points() != G) throw DataError("LOESS: grids differ");
  std::vector<double> so(kNoleapDays * G, 0.0), sf(kNoleapDays * G, 0.0);
  std::vector<size_t> count(kNoleapDays * G, 0);
  for (size_t r = 0; r < raw.num_dates() && raw.date(r) < cutoff; ++r) {
    const MonthDay md = MonthDay::Of(raw.date(r));
    if (md.is_feb29()) continue;
    auto ro = obs.row_of(raw.date(r));
    if (!ro) continue;
    const size_t slot = static_cast<size_t>(md.noleap_index());
    for (size_t g = 0; g < G; ++g) {
      if (!raw.present(r, g) || !obs.present(*ro, g)) continue;
      so[slot * G + g] += obs.at(*ro, g);
      sf[slot * G + g] += raw.at(r, g);
      ++count[slot * G + g];
    }
  }
  LoessCorrection out;
  out.mode = mode;
  out.points = G;
  out.max_ratio = max_ratio;
  out.smoothed_obs.resize(kNoleapDays * G);
  out.smoothed_forecast.resize(kNoleapDays * G);
  out.correction.resize(kNoleapDays * G);
  std::vector<double> a(kNoleapDays), b(kNoleapDays);
  for (size_t g = 0; g < G; ++g) {
    for (size_t s = 0; s < kNoleapDays; ++s) {
      const size_t c = count[s * G + g];
      if (c == 0) {
        const MonthDay md = MonthDay::FromNoleapIndex(static_cast<int>(s));
        throw DataError("LOESS: no training pair for month-day " +
                        std::to_string(md.month) + "-" + std::to_string(md.day) +
                        " at grid point " + std::to_string(g));
      }
      a[s] = so[s * G + g] / static_cast<double>(c);
      b[s] = sf[s * G + g] / static_cast<double>(c);
    }
    const auto sa = loess_smooth(a);
    const auto sb = loess_smooth(b);
    for (size_t s = 0; s < kNoleapDays; ++s) {
      out.smoothed_obs[s * G + g] = sa[s];
      out.smoothed_forecast[s * G + g] = sb[s];
      if (mode == LoessMode::kAdditive) {
        out.correction[s * G + g] = sa[s] - sb[s];
      } else {
        const double ratio = sa[s] / std::max(sb[s], kLoessMinForecast);
        out.correction[s * G + g] = std::clamp(ratio, 0.0, max_ratio);
      }
    }
  }
  return out;
}

std::vector<double> loess_apply(const LoessCorrection& corr,
                                std::span<const double> raw, CalendarDate t_star) {
  const size_t G = corr.points;
  if (raw.size() != G) throw DomainError("LOESS: raw forecast length mismatch");
  const size_t slot = static_cast<size_t>(MonthDay::Of(t_star).noleap_index());
  std::vector<double> out(G);
  for (size_t g = 0; g < G; ++g) {
    const double c = corr.correction[slot * G + g];
    out[g] = corr.mode == LoessMode::kAdditive ? raw[g] + c : raw[g] * c;
  }
  return out;
}

}  // namespace subseas
