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

#include "subseas/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "subseas/error.h"
#include "subseas/quantile.h"
#include "subseas/random.h"

namespace subseas {
namespace {

void check_same_size(size_t a, size_t b, const char* what) {
  if (a != b) {
    throw DomainError(std::string(what) + ": vector lengths differ (" +
                      std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

std::optional<double> skill(std::span<const double> yhat,
                            std::span<const double> y,
                            std::span<const double> c) {
  check_same_size(yhat.size(), y.size(), "skill");
  check_same_size(y.size(), c.size(), "skill");
  double dot = 0.0, nf = 0.0, no = 0.0;
  for (size_t g = 0; g < y.size(); ++g) {
    const double a = yhat[g] - c[g];
    const double b = y[g] - c[g];
    dot += a * b;
    nf += a * a;
    no += b * b;
  }
  if (nf == 0.0 || no == 0.0) return std::nullopt;
  const double s = dot / (std::sqrt(nf) * std::sqrt(no));
  return std::clamp(s, -1.0, 1.0);
}

ConfidenceInterval bootstrap_ci(std::span<const double> values, double level,
                                int resamples, uint64_t seed) {
  if (values.empty()) throw DomainError("bootstrap of an empty sample");
  if (resamples < 1) throw DomainError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap level must be in (0, 1)");
  std::mt19937_64 engine(seed);
  const uint64_t n = values.size();
  std::vector<double> means(static_cast<size_t>(resamples));
  for (double& m : means) {
    double acc = 0.0;
    for (uint64_t i = 0; i < n; ++i) acc += values[uniform_index(engine, n)];
    m = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  return {quantile_sorted(means, (1.0 - level) / 2.0),
          quantile_sorted(means, (1.0 + level) / 2.0), level};
}

SkillSummary mean_skill(std::vector<CalendarDate> dates,
                        std::vector<std::optional<double>> skills) {
  if (dates.size() != skills.size()) throw DomainError("mean_skill: dates and skills differ in length");
  SkillSummary out;
  std::array<double, 4> season_sum{};
  double sum = 0.0;
  for (size_t i = 0; i < skills.size(); ++i) {
    if (!skills[i]) continue;
    sum += *skills[i];
    ++out.defined;
    const int s = static_cast<int>(season_of(dates[i]));
    season_sum[s] += *skills[i];
    ++out.season_count[s];
  }
  if (out.defined == 0) throw DataError("mean_skill: no defined skill values");
  out.mean = sum / static_cast<double>(out.defined);
  for (int s = 0; s < 4; ++s) {
    if (out.season_count[s] > 0) {
      out.season_mean[s] = season_sum[s] / static_cast<double>(out.season_count[s]);
    }
  }
  out.dates = std::move(dates);
  out.skills = std::move(skills);
  return out;
}

SkillSummary mean_skill(std::vector<CalendarDate> dates,
                        std::vector<std::optional<double>> skills, double level,
                        int resamples, uint64_t seed) {
  SkillSummary out = mean_skill(std::move(dates), std::move(skills));
  std::vector<double> defined;
  defined.reserve(out.defined);
  for (const auto& s : out.skills) {
    if (s) defined.push_back(*s);
  }
  out.ci = bootstrap_ci(defined, level, resamples, seed);
  return out;
}

std::vector<std::optional<double>> spatial_skill(const FieldSeries& forecasts,
                                                 const FieldSeries& obs,
                                                 const Climatology& clim) {
  const size_t G = obs.num_points();
  if (forecasts.num_points() != G || clim.grid().size() != G) {
    throw DomainError("spatial_skill: grids differ");
  }
  std::vector<double> dot(G, 0.0), nf(G, 0.0), no(G, 0.0);
  for (size_t r = 0; r < forecasts.num_dates(); ++r) {
    const CalendarDate d = forecasts.date(r);
    auto ro = obs.row_of(d);
    if (!ro) continue;
    auto c = clim.at(d);
    for (size_t g = 0; g < G; ++g) {
      if (!forecasts.present(r, g) || !obs.present(*ro, g)) continue;
      const double a = forecasts.at(r, g) - c[g];
      const double b = obs.at(*ro, g) - c[g];
      dot[g] += a * b;
      nf[g] += a * a;
      no[g] += b * b;
    }
  }
  std::vector<std::optional<double>> out(G);
  for (size_t g = 0; g < G; ++g) {
    if (nf[g] > 0.0 && no[g] > 0.0) {
      out[g] = std::clamp(dot[g] / (std::sqrt(nf[g]) * std::sqrt(no[g])), -1.0, 1.0);
    }
  }
  return out;
}

double fraction_above(std::span<const std::optional<double>> spatial,
                      double threshold) {
  size_t defined = 0, above = 0;
  for (const auto& v : spatial) {
    if (!v) continue;
    ++defined;
    if (*v > threshold) ++above;
  }
  if (defined == 0) throw DataError("fraction_above: every grid point is undefined");
  return static_cast<double>(above) / static_cast<double>(defined);
}

std::vector<std::pair<double, double>> fraction_above_curve(
    std::span<const std::optional<double>> spatial,
    std::span<const double> thresholds) {
  std::vector<std::pair<double, double>> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) out.emplace_back(t, fraction_above(spatial, t));
  return out;
}

std::vector<double> bias_map(const FieldSeries& forecasts, const FieldSeries& obs) {
  const size_t G = obs.num_points();
  if (forecasts.num_points() != G) throw DomainError("bias_map: grids differ");
  std::vector<double> sum(G, 0.0);
  std::vector<size_t> count(G, 0);
  for (size_t r = 0; r < forecasts.num_dates(); ++r) {
    auto ro = obs.row_of(forecasts.date(r));
    if (!ro) continue;
    for (size_t g = 0; g < G; ++g) {
      if (!forecasts.present(r, g) || !obs.present(*ro, g)) continue;
      sum[g] += forecasts.at(r, g) - obs.at(*ro, g);
      ++count[g];
    }
  }
  std::vector<double> out(G, std::numeric_limits<double>::quiet_NaN());
  for (size_t g = 0; g < G; ++g) {
    if (count[g] > 0) out[g] = sum[g] / static_cast<double>(count[g]);
  }
  return out;
}

double geographic_loss(std::span<const double> yhat, std::span<const double> y,
                       Loss loss) {
  check_same_size(yhat.size(), y.size(), "geographic_loss");
  if (y.empty()) throw DomainError("geographic_loss of empty vectors");
  double acc = 0.0;
  for (size_t g = 0; g < y.size(); ++g) {
    const double e = yhat[g] - y[g];
    acc += e * e;
  }
  const double mse = acc / static_cast<double>(y.size());
  return loss == Loss::kMSE ? mse : std::sqrt(mse);
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw DomainError("empirical distribution needs at least one member");
  std::sort(members_.begin(), members_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  const auto it = std::upper_bound(members_.begin(), members_.end(), x);
  return static_cast<double>(it - members_.begin()) /
         static_cast<double>(members_.size());
}

double EmpiricalDistribution::mean() const {
  return std::accumulate(members_.begin(), members_.end(), 0.0) /
         static_cast<double>(members_.size());
}

double crps(const EmpiricalDistribution& dist, double y) {
  const auto m = dist.members();
  const double n = static_cast<double>(m.size());
  double abs_err = 0.0;
  for (double x : m) abs_err += std::fabs(x - y);
  // sum_{i,j} |x_i - x_j| = 2 sum_i x_(i) (2i - n + 1) for sorted members.
  double spread = 0.0;
  for (size_t i = 0; i < m.size(); ++i) {
    spread += m[i] * (2.0 * static_cast<double>(i) - n + 1.0);
  }
  spread *= 2.0;
  return std::max(0.0, abs_err / n - spread / (2.0 * n * n));
}

double brier_skill_score_from_probabilities(std::span<const double> prob,
                                            std::span<const double> y,
                                            std::span<const double> x) {
  check_same_size(prob.size(), y.size(), "brier_skill_score");
  check_same_size(y.size(), x.size(), "brier_skill_score");
  if (y.empty()) throw DomainError("brier_skill_score: empty grid");
  double bs = 0.0, ref = 0.0;
  for (size_t g = 0; g < y.size(); ++g) {
    const double event = y[g] <= x[g] ? 1.0 : 0.0;
    bs += (prob[g] - event) * (prob[g] - event);
    ref += (2.0 / 3.0 - event) * (2.0 / 3.0 - event);
  }
  return 1.0 - bs / ref;
}

double brier_skill_score(std::span<const EmpiricalDistribution> dists,
                         std::span<const double> y, std::span<const double> x) {
  check_same_size(dists.size(), x.size(), "brier_skill_score");
  std::vector<double> prob(dists.size());
  for (size_t g = 0; g < dists.size(); ++g) prob[g] = dists[g].cdf(x[g]);
  return brier_skill_score_from_probabilities(prob, y, x);
}

TercileThresholds TercileThresholds::Build(const FieldSeries& obs, YearRange base) {
  if (base.first > base.last) throw DataError("empty tercile base period");
  const size_t G = obs.num_points();
  auto samples = month_day_samples(obs, base);
  TercileThresholds out;
  out.points_ = G;
  out.table_.assign(366 * G, std::numeric_limits<double>::quiet_NaN());
  out.has_slot_.assign(366, 0);
  for (size_t slot = 0; slot < 366; ++slot) {
    bool all = true;
    for (size_t g = 0; g < G && all; ++g) all = !samples[slot][g].empty();
    if (!all) continue;
    for (size_t g = 0; g < G; ++g) {
      out.table_[slot * G + g] = quantile(samples[slot][g], 2.0 / 3.0);
    }
    out.has_slot_[slot] = 1;
  }
  for (int slot = 0; slot < 366; ++slot) {
    if (!out.has_slot_[slot] && !MonthDay::FromLeapIndex(slot).is_feb29()) {
      throw DataError("tercile base period lacks month-day slot " + std::to_string(slot));
    }
  }
  return out;
}

std::span<const double> TercileThresholds::at(MonthDay md) const {
  int slot = md.leap_index();
  if (!has_slot_[slot] && md.is_feb29()) slot = MonthDay{2, 28}.leap_index();
  return {table_.data() + static_cast<size_t>(slot) * points_, points_};
}

}  // namespace subseas
