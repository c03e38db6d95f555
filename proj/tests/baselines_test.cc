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
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "subseas/baselines.h"
#include "subseas/error.h"
#include "subseas/quantile.h"
#include "test_util.h"

namespace subseas {
namespace {

using testing::daily_archive;
using testing::daily_series;
using testing::line_grid;

const TaskSpec kTask = TaskSpec::Parse("tmp2m_34w");

DataGuard guard_at(CalendarDate t, AccessAudit* audit = nullptr) {
  return DataGuard(AccessHorizon::For(kTask, t), audit);
}

// p with quantile_sorted(p) == v, found by bisection on the monotone map.
double rank_by_bisection(const std::vector<double>& s, double v) {
  if (v <= s.front()) return v < s.front() ? 0.0 : -1.0;
  if (v >= s.back()) return v > s.back() ? 1.0 : -1.0;
  double lo = 0, hi = 1;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (quantile_sorted(s, mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(QuantileMapTest, WorkedExample) {
  const std::vector<double> f = {1, 2, 3, 4, 5}, o = {2, 4, 6, 8, 10};
  EXPECT_DOUBLE_EQ(quantile_map_value(f, o, 3.0), 6.0);
  EXPECT_DOUBLE_EQ(quantile_map_value(f, o, 2.0), 4.0);
  // Ranks are clamped to [0.1, 0.9]: q_f(0.1) = 1.4, q_o(0.1) = 2.8.
  EXPECT_NEAR(quantile_map_value(f, o, 0.0), 1.4, 1e-12);
  EXPECT_NEAR(quantile_map_value(f, o, -100.0), -98.6, 1e-12);
  EXPECT_NEAR(quantile_map_value(f, o, 10.0), 14.6, 1e-12);
  EXPECT_THROW(quantile_map_value({}, o, 1.0), DataError);
}

TEST(QuantileMapTest, IdenticalSamplesAreIdentity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> s(30);
  for (auto& v : s) v = n01(rng);
  std::sort(s.begin(), s.end());
  for (double raw = -4; raw <= 4; raw += 0.01) {
    EXPECT_NEAR(quantile_map_value(s, s, raw), raw, 1e-12);
  }
}

TEST(QuantileMapTest, FuzzMonotoneAndMatchesBisection) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> size(2, 25);
  for (int c = 0; c < 10000; ++c) {
    std::vector<double> f(size(rng)), o(size(rng));
    for (auto& v : f) v = std::round(n01(rng) * 4) / 2;  // forces ties
    for (auto& v : o) v = 3 + 2 * n01(rng);
    std::sort(f.begin(), f.end());
    std::sort(o.begin(), o.end());
    double a = n01(rng) * 3, b = n01(rng) * 3;
    if (a > b) std::swap(a, b);
    const double qa = quantile_map_value(f, o, a), qb = quantile_map_value(f, o, b);
    ASSERT_LE(qa, qb + 1e-12) << "case " << c;
    const double p = rank_by_bisection(f, a);
    if (p >= 0 && !std::binary_search(f.begin(), f.end(), a)) {
      const double r = std::clamp(p, kQuantileRankLow, kQuantileRankHigh);
      ASSERT_NEAR(qa, a + quantile_sorted(o, r) - quantile_sorted(f, r), 1e-8) << "case " << c;
    }
  }
}

TEST(QuantileMapTest, FitPoolsByMonthDayAndClipsPrecip) {
  const Grid g = line_grid(1);
  const auto raw = daily_series(g, CalendarDate(2000, 1, 1), CalendarDate(2004, 12, 31),
                                [](CalendarDate d, size_t) { return 1.0 * d.year(); });
  const auto obs = daily_series(g, CalendarDate(2000, 1, 1), CalendarDate(2004, 12, 31),
                                [](CalendarDate d, size_t) { return 2.0 * d.year(); });
  const QuantileMapModel m = QuantileMapModel::Fit(raw, obs, CalendarDate(2003, 3, 1));
  const int mar1 = MonthDay{3, 1}.noleap_index();
  EXPECT_EQ(std::vector<double>(m.forecasts(mar1, 0).begin(), m.forecasts(mar1, 0).end()),
            (std::vector<double>{2000, 2001, 2002, 2003}));
  EXPECT_EQ(m.observations(mar1 + 1, 0).size(), 3u);
  // Feb 29 pools onto Feb 28.
  EXPECT_EQ(m.forecasts(MonthDay{2, 28}.noleap_index(), 0).size(), 5u);
  const std::vector<double> neg = {-1e6};
  EXPECT_EQ(quantile_map(m, neg, CalendarDate(2004, 3, 1), Variable::kPrecipitation)[0], 0.0);
  EXPECT_LT(quantile_map(m, neg, CalendarDate(2004, 3, 1), Variable::kTemperature)[0], 0.0);
}

// Local linear fit at each index from the k nearest indices, solved directly.
std::vector<double> loess_oracle(const std::vector<double>& y, double frac) {
  const int n = static_cast<int>(y.size());
  const int k = std::clamp<int>(static_cast<int>(std::lround(frac * n)), 2, n);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> dist(n);
    for (int j = 0; j < n; ++j) dist[j] = std::abs(j - i);
    std::vector<int> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
    double h = sorted[k - 1];
    if (h == 0) h = 1;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd w(n), yy(n);
    for (int j = 0; j < n; ++j) {
      const double u = dist[j] / h;
      w(j) = u < 1 ? std::pow(1 - u * u * u, 3) : 0.0;
      x(j, 0) = 1;
      x(j, 1) = j - i;
      yy(j) = y[j];
    }
    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    out[i] = (xtw * x).ldlt().solve(xtw * yy)(0);
  }
  return out;
}

TEST(LoessTest, MatchesWeightedLeastSquares) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int n : {20, 57, 365}) {
    std::vector<double> y(n);
    for (int j = 0; j < n; ++j) y[j] = std::sin(j / 9.0) + 0.3 * n01(rng);
    const auto got = loess_smooth(y);
    const auto want = loess_oracle(y, kLoessFraction);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(got[j], want[j], 1e-9) << n << " " << j;
  }
}

TEST(LoessTest, ReproducesLinesAndIsLinear) {
  std::vector<double> line(365), a(365), b(365), sum(365);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int j = 0; j < 365; ++j) {
    line[j] = 2.5 - 0.01 * j;
    a[j] = n01(rng);
    b[j] = n01(rng);
    sum[j] = 3 * a[j] - b[j];
  }
  const auto sl = loess_smooth(line);
  const auto sa = loess_smooth(a), sb = loess_smooth(b), ss = loess_smooth(sum);
  for (int j = 0; j < 365; ++j) {
    EXPECT_NEAR(sl[j], line[j], 1e-11);
    EXPECT_NEAR(ss[j], 3 * sa[j] - sb[j], 1e-11);
  }
  EXPECT_THROW(loess_smooth(a, 0.0), DomainError);
  EXPECT_TRUE(loess_smooth(std::vector<double>{}).empty());
}

TEST(LoessTest, FitRecoversOffsetAndRatio) {
  const Grid g = line_grid(2);
  const CalendarDate first(2000, 1, 1), last(2003, 12, 31);
  auto f = [](CalendarDate d, size_t p) {
    return 2 + std::sin(d.ordinal() / 30.0 + p) + std::cos(d.ordinal() * 0.7);
  };
  const auto raw = daily_series(g, first, last, f);
  const auto add = daily_series(g, first, last, [&](CalendarDate d, size_t p) { return f(d, p) - 1.75; });
  const auto mul = daily_series(g, first, last, [&](CalendarDate d, size_t p) { return 3 * f(d, p); });
  const auto ca = loess_fit(add, raw, last + 1, LoessMode::kAdditive);
  const auto cm = loess_fit(mul, raw, last + 1, LoessMode::kMultiplicative);
  for (double c : ca.correction) EXPECT_NEAR(c, -1.75, 1e-9);
  for (double c : cm.correction) EXPECT_NEAR(c, 3.0, 1e-9);
  const std::vector<double> r = {1.0, 4.0};
  const auto out = loess_apply(ca, r, CalendarDate(2005, 7, 4));
  EXPECT_NEAR(out[0], -0.75, 1e-9);
  EXPECT_NEAR(loess_apply(cm, r, CalendarDate(2005, 7, 4))[1], 12.0, 1e-9);

  // Near-zero forecasts hit the ratio ceiling.
  const auto dry = daily_series(g, first, last, [](CalendarDate, size_t) { return 0.0; });
  const auto wet = daily_series(g, first, last, [](CalendarDate, size_t) { return 1.0; });
  for (double c : loess_fit(wet, dry, last + 1, LoessMode::kMultiplicative).correction) {
    EXPECT_EQ(c, kLoessMaxRatio);
  }
  // 100 days of history leave most month-days uncovered.
  EXPECT_THROW(loess_fit(add, raw, first + 100, LoessMode::kAdditive), DataError);
}

TEST(OpdebiasTest, DayWindowMatchesDirectMean) {
  const Grid g = line_grid(2);
  const CalendarDate first(1995, 1, 1), last(2010, 12, 31);
  const auto obs = daily_series(g, first, last, [](CalendarDate d, size_t p) {
    return std::sin(d.ordinal() / 20.0) + p;
  });
  const auto archive = daily_archive(g, first, last, {15}, [](CalendarDate i, int, size_t p) {
    return std::cos(i.ordinal() / 11.0) * 2 + p + 4;
  });
  ReforecastProtocol p;
  p.era = EraSelector::kAny;
  p.lookback_years = 5;
  p.day_window = 3;
  const CalendarDate t_star(2008, 4, 20);
  const auto out = operational_debias(p, kTask, archive, obs, t_star, guard_at(t_star));
  auto matches = protocol_matches(p, t_star);
  EXPECT_EQ(matches.size(), 35u);
  EXPECT_EQ(matches.front(), CalendarDate(2003, 4, 17));
  EXPECT_EQ(matches.back(), CalendarDate(2007, 4, 23));
  for (size_t k = 0; k < 2; ++k) {
    double df = 0, dy = 0;
    for (CalendarDate t : matches) {
      df += (*archive.ensemble_mean(t - 15, 15))[k];
      dy += (*obs.complete_row(t))[k];
    }
    const double raw = (*archive.ensemble_mean(t_star - 15, 15))[k];
    EXPECT_NEAR(out[k], raw - df / 35 + dy / 35, 1e-12);
  }
}

TEST(OpdebiasTest, ExactMonthDayHonorsCutoffAndEra) {
  const Grid g = line_grid(1);
  ForecastArchive::Builder b(g);
  const std::vector<double> ten = {10.0}, twelve = {12.0};
  for (int y = 2000; y <= 2004; ++y) b.add({CalendarDate(y, 3, 1) - 15, 15, 0}, Era::kReforecast, ten);
  b.add({CalendarDate(2005, 3, 1) - 15, 15, 0}, Era::kForecast, twelve);
  const ForecastArchive a = std::move(b).build();
  const auto obs = daily_series(g, CalendarDate(2000, 1, 1), CalendarDate(2005, 12, 31),
                                [](CalendarDate d, size_t) { return d.year() == 2004 ? 100.0 : 7.0; });
  ReforecastProtocol p;
  p.mode = ReforecastProtocol::Mode::kExactMonthDay;
  p.hindcast = {2000, 2005};
  const CalendarDate t_star(2005, 3, 1);
  AccessAudit audit;
  const auto out = operational_debias(p, kTask, a, obs, t_star, guard_at(t_star, &audit));
  // 2000..2004 matched (2005 is the target itself and unobservable).
  EXPECT_NEAR(out[0], 12 - 10 + (4 * 7.0 + 100) / 5, 1e-12);
  EXPECT_EQ(audit.violations(), 0u);
  p.era = EraSelector::kForecast;
  EXPECT_THROW(operational_debias(p, kTask, a, obs, t_star, guard_at(t_star)), DataError);
  p.hindcast = {2006, 2005};
  EXPECT_THROW(validate_protocol(p), ConfigError);
}

TEST(MultimodelTest, MostRecentIssuanceWithinLookback) {
  const Grid g = line_grid(1);
  const CalendarDate t_star(2010, 5, 1);
  ForecastArchive::Builder b1(g), b2(g);
  const std::vector<double> v1 = {1.0}, v2 = {2.0}, v3 = {6.0};
  b1.add({t_star - 15, 15, 0}, Era::kForecast, v1);
  b1.add({t_star - 17, 17, 0}, Era::kForecast, v2);
  b2.add({t_star - 18, 18, 0}, Era::kForecast, v3);
  b2.add({t_star - 14, 14, 0}, Era::kForecast, v2);  // issued too late
  const ForecastArchive a1 = std::move(b1).build(), a2 = std::move(b2).build();
  const std::vector<const ForecastArchive*> models = {&a1, &a2};
  std::vector<std::optional<CalendarDate>> used;
  const auto out = multimodel_mean(models, kTask, t_star, guard_at(t_star), 6, &used);
  EXPECT_DOUBLE_EQ(out[0], 3.5);
  EXPECT_EQ(used[0], t_star - 15);
  EXPECT_EQ(used[1], t_star - 18);
  // Lookback 2 drops the second model.
  EXPECT_DOUBLE_EQ(multimodel_mean(models, kTask, t_star, guard_at(t_star), 2)[0], 1.0);
  const std::vector<const ForecastArchive*> late = {&a2};
  EXPECT_THROW(multimodel_mean(late, kTask, t_star, guard_at(t_star), 2), DataError);
}

TEST(RawSeriesTest, IndexedByTargetDate) {
  const Grid g = line_grid(1);
  const auto a = daily_archive(g, CalendarDate(2001, 1, 1), CalendarDate(2001, 1, 10), {14, 15},
                               [](CalendarDate i, int l, size_t) { return i.day() * 100.0 + l; });
  const FieldSeries raw = raw_forecast_series(kTask, a);
  ASSERT_EQ(raw.num_dates(), 10u);
  EXPECT_EQ(raw.date(0), CalendarDate(2001, 1, 16));
  EXPECT_EQ(raw.at(0, 0), 115.0);
}

}  // namespace
}  // namespace subseas
