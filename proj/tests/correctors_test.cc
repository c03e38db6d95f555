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
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "subseas/climatology.h"
#include "subseas/correctors.h"
#include "subseas/error.h"
#include "subseas/metrics.h"
#include "subseas/observable.h"
#include "subseas/pipeline.h"
#include "subseas/synth.h"
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

double noise(CalendarDate d, size_t g, int salt = 0) {
  return std::sin(d.ordinal() * 12.9898 + g * 78.233 + salt * 3.17) * 43758.5453 -
         std::floor(std::sin(d.ordinal() * 12.9898 + g * 78.233 + salt * 3.17) * 43758.5453);
}

// Dynamical++ evaluated directly from the archive, no caches.
std::vector<double> dynpp_oracle(const DynppConfig& cfg, const ForecastArchive& a,
                                 const FieldSeries& obs, CalendarDate t_star) {
  const size_t G = obs.num_points();
  auto fbar = [&](CalendarDate t) -> std::optional<std::vector<double>> {
    std::vector<double> s(G, 0.0);
    int cells = 0;
    for (int d = 1; d <= cfg.issuances; ++d) {
      for (int l : cfg.leads.leads) {
        auto m = a.ensemble_mean(t - (kTask.lead + d - 1), l);
        if (!m) continue;
        ++cells;
        for (size_t g = 0; g < G; ++g) s[g] += (*m)[g];
      }
    }
    if (cells == 0) return std::nullopt;
    for (auto& v : s) v /= cells;
    return s;
  };
  std::vector<double> acc(G, 0.0);
  int n = 0;
  for (size_t r = 0; r < obs.num_dates(); ++r) {
    const CalendarDate t = obs.date(r);
    if (t > t_star - kTask.training_gap()) break;
    const int64_t off = t_star - t;
    if (year_diff_offset(off) > cfg.training_years || day_diff_offset(off) > cfg.span) continue;
    auto f = fbar(t);
    auto y = obs.complete_row(t);
    if (!f || !y) continue;
    for (size_t g = 0; g < G; ++g) acc[g] += (*y)[g] - (*f)[g];
    ++n;
  }
  auto f = *fbar(t_star);
  for (size_t g = 0; g < G; ++g) f[g] += acc[g] / n;
  return f;
}

class DynppTest : public ::testing::Test {
 protected:
  void SetUp() override {
    grid = line_grid(3);
    first = CalendarDate(2000, 1, 1);
    last = CalendarDate(2004, 12, 31);
    obs = daily_series(grid, first, last, [](CalendarDate d, size_t g) {
      return 10 * std::cos(d.ordinal() / 58.1) + g + noise(d, g);
    });
    archive = daily_archive(grid, first, last, LeadSet::Range(15, 29).leads,
                            [&](CalendarDate i, int l, size_t g) {
                              auto r = obs.row_of(i + l);
                              const double truth = r ? obs.at(*r, g) : 0.0;
                              return truth + bias + 0.3 * noise(i, g, l);
                            });
  }
  Grid grid;
  CalendarDate first, last;
  FieldSeries obs;
  ForecastArchive archive;
  double bias = 5.0;
};

TEST_F(DynppTest, TwoPointWindow) {
  const CalendarDate t_star(2003, 6, 1);
  DynppConfig cfg{0, 1, LeadSet::Range(15, 15), 1};
  // Span 0 within one year: offsets whose floored phase is 0 or 365.
  const auto off = window_offsets(kTask, 0, 1, 10000);
  ASSERT_EQ(off, (std::vector<int64_t>{365, 366}));
  const auto out = dynpp_forecast(cfg, kTask, archive, obs, t_star);
  const auto f_star = *archive.ensemble_mean(t_star - 15, 15);
  for (size_t g = 0; g < grid.size(); ++g) {
    double r = 0;
    for (int64_t o : off) {
      const CalendarDate t0 = t_star - o;
      r += (*obs.complete_row(t0))[g] - (*archive.ensemble_mean(t0 - 15, 15))[g];
    }
    EXPECT_NEAR(out[g], f_star[g] + r / 2, 1e-12);
  }
}

TEST_F(DynppTest, MatchesDirectEvaluation) {
  const CalendarDate t_star(2004, 3, 17);
  for (const DynppConfig& cfg :
       {DynppConfig{35, 1, LeadSet::Range(15, 15), 12}, DynppConfig{14, 7, LeadSet::Range(15, 22), 12},
        DynppConfig{28, 42, LeadSet::Range(15, 22), 2}, DynppConfig{0, 14, LeadSet::Range(15, 15), 12}}) {
    const auto got = dynpp_forecast(cfg, kTask, archive, obs, t_star);
    const auto want = dynpp_oracle(cfg, archive, obs, t_star);
    for (size_t g = 0; g < grid.size(); ++g) EXPECT_NEAR(got[g], want[g], 1e-10) << cfg.label();
  }
}

TEST_F(DynppTest, LearnsConstantOffsetExactly) {
  // Noise-free forecasts: truth + b.
  const ForecastArchive exact = daily_archive(grid, first, last, {15},
                                              [&](CalendarDate i, int l, size_t g) {
                                                auto r = obs.row_of(i + l);
                                                return (r ? obs.at(*r, g) : 0.0) + bias;
                                              });
  const CalendarDate t_star(2004, 8, 9);
  const auto out = dynpp_forecast(dynpp_default(kTask), kTask, exact, obs, t_star);
  const auto y = *obs.complete_row(t_star);
  for (size_t g = 0; g < grid.size(); ++g) EXPECT_NEAR(out[g], y[g], 1e-9);
}

TEST_F(DynppTest, ReducesToMeanOffsetDebiasing) {
  const CalendarDate t_star(2004, 10, 2);
  const DynppConfig cfg{14, 1, LeadSet::Range(15, 15), 12};
  const auto out = dynpp_forecast(cfg, kTask, archive, obs, t_star);
  const auto raw = *archive.ensemble_mean(t_star - 15, 15);
  std::vector<double> offset(grid.size(), 0.0);
  int n = 0;
  for (int64_t o : window_offsets(kTask, 14, 12, t_star - first)) {
    const CalendarDate t = t_star - o;
    const auto f = *archive.ensemble_mean(t - 15, 15);
    const auto y = *obs.complete_row(t);
    for (size_t g = 0; g < grid.size(); ++g) offset[g] += y[g] - f[g];
    ++n;
  }
  for (size_t g = 0; g < grid.size(); ++g) EXPECT_NEAR(out[g] - raw[g], offset[g] / n, 1e-10);
}

TEST_F(DynppTest, EmptyWindowAndMissingForecastErrors) {
  const DynppConfig cfg = dynpp_default(kTask);
  EXPECT_THROW(dynpp_forecast(cfg, kTask, archive, obs, first + 20), DataError);
  try {
    dynpp_forecast(cfg, kTask, archive, obs, last + 400);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing (issuance, lead)"), std::string::npos);
  }
}

TEST_F(DynppTest, GuardedReadsStayObservable) {
  AccessAudit audit;
  for (const auto& cfg : dynpp_candidates(kTask)) {
    dynpp_forecast(cfg, kTask, archive, obs, CalendarDate(2004, 5, 5), &audit);
  }
  EXPECT_GT(audit.obs_reads(), 0u);
  EXPECT_EQ(audit.violations(), 0u);
  EXPECT_LE(audit.max_obs_excess(), 0);
  EXPECT_LE(audit.max_forecast_excess(), 0);
}

TEST(DynppConfigTest, GridAndLabels) {
  const auto grid = dynpp_candidates(kTask);
  EXPECT_FALSE(grid.empty());
  const DynppConfig def = dynpp_default(kTask);
  EXPECT_EQ(def.span, 35);
  EXPECT_EQ(def.issuances, 1);
  EXPECT_EQ(def.leads.leads, std::vector<int>{15});
  EXPECT_NE(std::find(grid.begin(), grid.end(), def), grid.end());
  for (const auto& c : grid) EXPECT_NO_THROW(validate_dynpp_config(c, kTask));
  EXPECT_THROW(validate_dynpp_config({3, 1, LeadSet::Range(15, 15)}, kTask), ConfigError);
  EXPECT_EQ(LeadSet::Parse("15-22"), LeadSet::Range(15, 22));
  EXPECT_EQ(LeadSet::Parse("15-22").label(), "15-22");
  EXPECT_THROW(LeadSet::Parse("22-15"), ConfigError);
  EXPECT_THROW(LeadSet::Parse("x"), ConfigError);
}

// Sparse observation series with chosen values on chosen dates.
FieldSeries sparse(const Grid& grid, const std::map<CalendarDate, std::vector<double>>& rows) {
  std::vector<CalendarDate> dates;
  std::vector<double> values;
  for (const auto& [d, v] : rows) {
    dates.push_back(d);
    values.insert(values.end(), v.begin(), v.end());
  }
  return FieldSeries::Dense(grid, dates, values);
}

TEST(ClimppTest, MedianAndMean) {
  const Grid grid = line_grid(1);
  const CalendarDate t_star(2010, 7, 1);
  const FieldSeries obs = sparse(grid, {{t_star - 365, {1.0}},
                                        {t_star - 730, {2.0}},
                                        {t_star - 1096, {100.0}},
                                        {t_star - 200, {-50.0}}});
  const ClimppConfig rmse{1, std::nullopt, Loss::kRMSE};
  const ClimppConfig mse{1, std::nullopt, Loss::kMSE};
  EXPECT_EQ(climpp_forecast(rmse, kTask, obs, t_star)[0], 2.0);
  EXPECT_NEAR(climpp_forecast(mse, kTask, obs, t_star)[0], 103.0 / 3.0, 1e-12);
  // Brute-force minimization of the summed loss over a fine grid.
  double best = 0, best_v = 1e300;
  for (double v = 0; v <= 100; v += 0.001) {
    const double s = std::abs(v - 1) + std::abs(v - 2) + std::abs(v - 100);
    if (s < best_v) {
      best_v = s;
      best = v;
    }
  }
  EXPECT_NEAR(best, 2.0, 1e-3);
  const FieldSeries one = sparse(grid, {{t_star - 365, {4.5}}});
  EXPECT_EQ(climpp_forecast(rmse, kTask, one, t_star)[0], 4.5);
  EXPECT_EQ(climpp_forecast(mse, kTask, one, t_star)[0], 4.5);
  const FieldSeries none = sparse(grid, {{t_star - 200, {4.5}}});
  EXPECT_THROW(climpp_forecast(rmse, kTask, none, t_star), DataError);
}

TEST(ClimppTest, PermutationInvariantAndMonotone) {
  const Grid grid = line_grid(2);
  const CalendarDate t_star(2012, 2, 10);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  std::vector<double> vals;
  for (int k = 0; k < 16; ++k) vals.push_back(n01(rng));
  auto build = [&](const std::vector<double>& v) {
    std::map<CalendarDate, std::vector<double>> rows;
    for (int y = 1; y <= 8; ++y) {
      rows[t_star - static_cast<int64_t>(std::llround(y * kDaysPerYear))] = {v[2 * y - 2],
                                                                           v[2 * y - 1]};
    }
    return sparse(grid, rows);
  };
  for (Loss loss : {Loss::kRMSE, Loss::kMSE}) {
    const ClimppConfig cfg{1, std::nullopt, loss};
    const auto base = climpp_forecast(cfg, kTask, build(vals), t_star);
    // Swapping training values between dates at the same point.
    auto swapped = vals;
    std::swap(swapped[0], swapped[6]);
    std::swap(swapped[3], swapped[13]);
    const auto perm = climpp_forecast(cfg, kTask, build(swapped), t_star);
    for (size_t g = 0; g < 2; ++g) EXPECT_NEAR(base[g], perm[g], 1e-15);
    for (size_t k = 0; k < vals.size(); ++k) {
      auto up = vals;
      up[k] += 0.75;
      const auto out = climpp_forecast(cfg, kTask, build(up), t_star);
      for (size_t g = 0; g < 2; ++g) EXPECT_GE(out[g], base[g]);
    }
  }
}

TEST(ClimppTest, Grid) {
  const auto t = climpp_candidates(kTask);
  EXPECT_EQ(t.size(), 8u);
  const auto p = climpp_candidates(TaskSpec::Parse("precip_34w"));
  EXPECT_EQ(p.size(), 4u);
  for (const auto& c : p) {
    EXPECT_EQ(c.loss, Loss::kMSE);
    EXPECT_FALSE(c.years);
  }
  EXPECT_EQ(climpp_default(kTask).span, 10);
  EXPECT_THROW(validate_climpp_config({2, std::nullopt, Loss::kRMSE}, kTask), ConfigError);
  EXPECT_THROW(validate_climpp_config({1, std::nullopt, Loss::kRMSE},
                                      TaskSpec::Parse("precip_34w")),
               ConfigError);
}

TEST(LeastSquaresTest, MatchesNormalEquations) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20 + trial * 3;
    Eigen::MatrixXd x(n, 5);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1;
      for (int j = 1; j < 5; ++j) x(i, j) = n01(rng) * (j + 1);
      y(i) = n01(rng);
    }
    bool deficient = true;
    const Eigen::VectorXd beta = solve_least_squares(x, y, &deficient);
    EXPECT_FALSE(deficient);
    const Eigen::VectorXd oracle = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    EXPECT_LE((beta - oracle).cwiseAbs().maxCoeff(), 1e-8);
    const Eigen::VectorXd resid = y - x * beta;
    for (int j = 0; j < 5; ++j) {
      EXPECT_LE(std::abs(resid.dot(x.col(j))), 1e-6 * resid.norm() * x.col(j).norm() + 1e-12);
    }
  }
}

TEST(LeastSquaresTest, MinimumNormOnDegenerateDesign) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(12, 5);
  x.col(0).setOnes();
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.5);
  bool deficient = false;
  const Eigen::VectorXd beta = solve_least_squares(x, y, &deficient);
  EXPECT_TRUE(deficient);
  EXPECT_NEAR(beta(0), 3.5, 1e-12);
  for (int j = 1; j < 5; ++j) EXPECT_NEAR(beta(j), 0.0, 1e-12);

  // Two identical columns share the weight equally.
  Eigen::MatrixXd z(6, 2);
  z.col(0) << 1, 2, 3, 4, 5, 6;
  z.col(1) = z.col(0);
  const Eigen::VectorXd yz = 4 * z.col(0);
  const Eigen::VectorXd bz = solve_least_squares(z, yz, &deficient);
  EXPECT_TRUE(deficient);
  EXPECT_NEAR(bz(0), 2.0, 1e-10);
  EXPECT_NEAR(bz(1), 2.0, 1e-10);
}

class PerppTest : public ::testing::Test {
 protected:
  void SetUp() override {
    grid = line_grid(2);
    first = CalendarDate(2001, 1, 1);
    last = CalendarDate(2003, 12, 31);
    std::vector<int> leads;
    for (int l = 15; l <= 29; ++l) leads.push_back(l);
    obs = daily_series(grid, first, last, [](CalendarDate d, size_t g) {
      return 5 * std::sin(d.ordinal() / 40.0 + g) + 2 * noise(d, g);
    });
    clim = build_climatology(obs, {2001, 2003});
    archive = daily_archive(grid, first, last, leads, [](CalendarDate i, int l, size_t g) {
      return 3 * noise(i, g, l) - 1;
    });
  }

  double fbar(CalendarDate issuance, size_t g) const {
    double s = 0;
    int n = 0;
    for (int l = 15; l <= 29; ++l) {
      auto m = archive.ensemble_mean(issuance, l);
      if (!m) continue;
      s += (*m)[g];
      ++n;
    }
    return n ? s / n : std::nan("");
  }

  // Independent design for target date t at point g.
  std::optional<std::array<double, 5>> row(CalendarDate t, size_t g) const {
    auto a = obs.row_of(t - 30), b = obs.row_of(t - 45);
    const double f = fbar(t - 16, g);
    if (!a || !b || std::isnan(f)) return std::nullopt;
    return std::array<double, 5>{1.0, clim.at(t)[g], obs.at(*a, g), obs.at(*b, g), f};
  }

  Grid grid;
  CalendarDate first, last;
  FieldSeries obs;
  Climatology clim;
  ForecastArchive archive;
};

TEST_F(PerppTest, FitMatchesNormalEquationsOracle) {
  const CalendarDate t_star(2003, 9, 1);
  const PerppCoefficients c = perpp_fit(kTask, archive, obs, clim, t_star);
  for (size_t g = 0; g < grid.size(); ++g) {
    std::vector<std::array<double, 5>> rows;
    std::vector<double> ys;
    for (size_t r = 0; r < obs.num_dates(); ++r) {
      const CalendarDate t = obs.date(r);
      if (t > t_star - 30) break;
      auto x = row(t, g);
      if (!x) continue;
      rows.push_back(*x);
      ys.push_back(obs.at(r, g));
    }
    EXPECT_EQ(c.rows[g], rows.size());
    Eigen::MatrixXd x(rows.size(), 5);
    Eigen::VectorXd y(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      for (int j = 0; j < 5; ++j) x(i, j) = rows[i][j];
      y(i) = ys[i];
    }
    const Eigen::VectorXd oracle = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(c.beta[g][j], oracle(j), 1e-8);
    Eigen::VectorXd beta(5);
    for (int j = 0; j < 5; ++j) beta(j) = c.beta[g][j];
    const Eigen::VectorXd resid = y - x * beta;
    for (int j = 0; j < 5; ++j) {
      EXPECT_LE(std::abs(resid.dot(x.col(j))), 1e-6 * resid.norm() * x.col(j).norm());
    }
  }
}

TEST_F(PerppTest, PredictReadsOutRegression) {
  const CalendarDate t_star(2003, 9, 1);
  const PerppCoefficients c = perpp_fit(kTask, archive, obs, clim, t_star);
  const auto out = perpp_predict(c, kTask, archive, obs, clim, t_star);
  for (size_t g = 0; g < grid.size(); ++g) {
    const auto x = *row(t_star, g);
    double dot = 0;
    for (int j = 0; j < 5; ++j) dot += c.beta[g][j] * x[j];
    EXPECT_NEAR(out[g], dot, 1e-12);
  }
  PerppCoefficients zero = c;
  for (auto& b : zero.beta) b.fill(0.0);
  for (double v : perpp_predict(zero, kTask, archive, obs, clim, t_star)) EXPECT_EQ(v, 0.0);

  // On a training date the prediction equals the fitted value.
  const CalendarDate t(2003, 5, 1);
  const auto fitted = perpp_predict(c, kTask, archive, obs, clim, t);
  for (size_t g = 0; g < grid.size(); ++g) {
    const auto x = *row(t, g);
    double dot = 0;
    for (int j = 0; j < 5; ++j) dot += c.beta[g][j] * x[j];
    EXPECT_NEAR(fitted[g], dot, 1e-12);
  }
}

TEST_F(PerppTest, ClimatologyTargetGivesUnitWeight) {
  // y depends only on the month-day, so it equals its own climatology.
  const FieldSeries periodic = daily_series(grid, first, last, [](CalendarDate d, size_t g) {
    return std::cos(MonthDay::Of(d).leap_index() / 30.0) * 4 + g;
  });
  const Climatology pc = build_climatology(periodic, {2001, 2003});
  const PerppCoefficients c = perpp_fit(kTask, archive, periodic, pc, CalendarDate(2003, 11, 1));
  for (size_t g = 0; g < grid.size(); ++g) {
    const double want[] = {0, 1, 0, 0, 0};
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(c.beta[g][j], want[j], 1e-8) << j;
    EXPECT_FALSE(c.rank_deficient[g]);
  }
}

TEST_F(PerppTest, ScaledEnsembleTarget) {
  // y = 2 f_bar(t - l* - 1) exactly.
  std::vector<CalendarDate> dates;
  std::vector<double> vals;
  for (CalendarDate d = first; d <= last; d = d + 1) {
    dates.push_back(d);
    for (size_t g = 0; g < grid.size(); ++g) {
      const double f = fbar(d - 16, g);
      vals.push_back(std::isnan(f) ? noise(d, g) : 2 * f);
    }
  }
  const FieldSeries y = FieldSeries::Dense(grid, dates, vals);
  const Climatology yc = build_climatology(y, {2001, 2003});
  const PerppCoefficients c = perpp_fit(kTask, archive, y, yc, CalendarDate(2003, 12, 1));
  for (size_t g = 0; g < grid.size(); ++g) {
    const double want[] = {0, 0, 0, 0, 2};
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(c.beta[g][j], want[j], 1e-8) << j;
  }
}

TEST_F(PerppTest, TooFewRowsAndLeakage) {
  EXPECT_THROW(perpp_fit(kTask, archive, obs, clim, first + 70), DataError);
  AccessAudit audit;
  const CalendarDate t_star(2003, 2, 2);
  const auto c = perpp_fit(kTask, archive, obs, clim, t_star, &audit);
  perpp_predict(c, kTask, archive, obs, clim, t_star, &audit);
  EXPECT_EQ(audit.violations(), 0u);
  EXPECT_LE(audit.max_obs_excess(), 0);
}

TEST(TunerTest, PicksLowestMeanAndBreaksTiesByOrder) {
  const CalendarDate t0(2005, 1, 1);
  std::vector<CalendarDate> dates;
  for (int k = 0; k < 100; ++k) dates.push_back(t0 + k);
  const CalendarDate t_star = t0 + 200;
  TuningRecord rec(dates, 3);
  for (size_t i = 0; i < dates.size(); ++i) {
    rec.set(0, i, 2.0);
    rec.set(1, i, 1.0);
    rec.set(2, i, 1.0);
  }
  rec.finalize();
  const TuneResult r = tune(rec, t_star, guard_at(t_star), 0);
  EXPECT_EQ(r.index, 1u);
  EXPECT_FALSE(r.fallback);
  EXPECT_DOUBLE_EQ(r.mean_rmse, 1.0);
  EXPECT_EQ(r.scored_dates, 100u);

  TuningRecord single(dates, 1);
  single.set(0, 3, 9.0);
  single.finalize();
  EXPECT_EQ(tune(single, t_star, guard_at(t_star), 0).index, 0u);
}

TEST(TunerTest, WindowRespectsCutoffAndThreeYears) {
  const CalendarDate t_star(2010, 6, 1);
  std::vector<CalendarDate> dates;
  for (CalendarDate d = t_star - 1500; d <= t_star; d = d + 1) dates.push_back(d);
  TuningRecord rec(dates, 2);
  const CalendarDate earliest = t_star - static_cast<int64_t>(std::floor(3 * kDaysPerYear));
  const CalendarDate cutoff = t_star - kTask.training_gap();
  for (size_t i = 0; i < dates.size(); ++i) {
    const bool inside = dates[i] >= earliest && dates[i] <= cutoff;
    // Candidate 1 only looks better outside the window.
    rec.set(0, i, inside ? 1.0 : 5.0);
    rec.set(1, i, inside ? 1.5 : 0.0);
  }
  rec.finalize();
  AccessAudit audit;
  const TuneResult r = tune(rec, t_star, guard_at(t_star, &audit), 1);
  EXPECT_EQ(r.index, 0u);
  EXPECT_EQ(r.scored_dates, static_cast<size_t>(cutoff - earliest + 1));
  EXPECT_EQ(audit.violations(), 0u);
}

TEST(TunerTest, FallsBackWithoutHistory) {
  const CalendarDate t_star(2010, 6, 1);
  TuningRecord rec({t_star - 10, t_star - 5}, 3);
  rec.set(0, 0, 1.0);  // inside the observability gap, never counted
  rec.finalize();
  const TuneResult r = tune(rec, t_star, guard_at(t_star), 2, kTunerWindowYears, false);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.index, 2u);
}

TEST(TunerTest, ProgressiveChoiceMatchesExhaustiveScoring) {
  ScenarioConfig sc;
  sc.grid_rows = 2;
  sc.grid_cols = 2;
  sc.first_year = 2000;
  sc.last_year = 2005;
  sc.members = 2;
  sc.leads = {15, 16, 17, 18, 19, 20, 21, 22};
  sc.bias.offset = 4.0;
  sc.seed = 5;
  const Scenario s = generate_scenario(sc);
  const Climatology clim = build_climatology(s.obs, {2000, 2003});
  std::vector<DynppConfig> grid;
  for (int span : {0, 14, 28, 35}) grid.push_back({span, 1, LeadSet::Range(15, 15)});
  grid.push_back({35, 7, LeadSet::Range(15, 22)});

  PipelineInputs in;
  in.task = kTask;
  in.obs = &s.obs;
  in.archive = &s.archive;
  in.clim = &clim;
  in.dynpp_grid = grid;
  const std::vector<CalendarDate> targets = {CalendarDate(2005, 3, 1), CalendarDate(2005, 9, 15)};
  const CorrectionRun run = run_correction(in, ModelKind::kDynpp, targets);
  ASSERT_EQ(run.tuning.size(), targets.size());

  DynppModel model(kTask, s.archive, s.obs);
  for (size_t k = 0; k < targets.size(); ++k) {
    const CalendarDate t_star = targets[k];
    const CalendarDate lo = t_star - static_cast<int64_t>(std::floor(3 * kDaysPerYear));
    const CalendarDate hi = t_star - kTask.training_gap();
    size_t best = 0;
    double best_rmse = 1e300;
    for (size_t c = 0; c < grid.size(); ++c) {
      double sum = 0;
      int n = 0;
      for (CalendarDate t = lo; t <= hi; t = t + 1) {
        auto f = model.try_forecast(grid[c], t, guard_at(t));
        auto y = s.obs.complete_row(t);
        if (!f || !y) continue;
        sum += geographic_loss(*f, *y, Loss::kRMSE);
        ++n;
      }
      if (n > 0 && sum / n < best_rmse) {
        best_rmse = sum / n;
        best = c;
      }
    }
    EXPECT_EQ(run.tuning[k].config, grid[best].label());
    EXPECT_NEAR(run.tuning[k].mean_rmse, best_rmse, 1e-9);
    EXPECT_EQ(grid[best].span, 35);  // stationary bias favors the widest window
  }
}

TEST(AbcTest, DeterministicMean) {
  const TaskSpec w34 = kTask, w12 = TaskSpec::Parse("tmp2m_12w");
  AbcComponents p{{{0.0, 3.0}}, {{1.0, 3.0}}, {{2.0, 3.0}}};
  const auto out = abc_forecast(w34, p);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  EXPECT_DOUBLE_EQ(out[1], 3.0);
  AbcComponents q{{{0.0}}, std::nullopt, {{2.0}}};
  EXPECT_DOUBLE_EQ(abc_forecast(w12, q)[0], 1.0);
  EXPECT_THROW(abc_forecast(w34, q), DataError);
  AbcComponents r{{{0.0}}, {{5.0}}, std::nullopt};
  EXPECT_THROW(abc_forecast(w34, r), DataError);
  // Shift commutes with the ensemble.
  AbcComponents s{{{0.25}}, {{-1.5}}, {{4.0}}};
  AbcComponents t{{{7.25}}, {{5.5}}, {{11.0}}};
  EXPECT_NEAR(abc_forecast(w34, t)[0], abc_forecast(w34, s)[0] + 7.0, 1e-12);
}

TEST(AbcTest, ProbabilisticShapeAndSubsetMean) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n01;
  const size_t G = 6, n = 51;
  std::vector<std::vector<double>> store(n, std::vector<double>(G));
  std::vector<double> mean(G, 0.0), dyn(G), per(G), cl(G);
  for (auto& m : store) {
    for (size_t g = 0; g < G; ++g) {
      m[g] = 20 + 3 * n01(rng);
      mean[g] += m[g] / n;
    }
  }
  for (size_t g = 0; g < G; ++g) {
    dyn[g] = mean[g] - 2 + n01(rng);
    per[g] = mean[g] + n01(rng);
    cl[g] = 18 + n01(rng);
  }
  std::vector<std::span<const double>> members(store.begin(), store.end());
  const auto dists = abc_probabilistic(members, dyn, per, cl, mean, Variable::kTemperature);
  ASSERT_EQ(dists.size(), G);
  for (const auto& d : dists) EXPECT_EQ(d.size(), 103u);
  const CorrectedMembers cm = abc_member_corrections(members, dyn, per, cl, mean);
  ASSERT_EQ(cm.dyn.size(), n);
  for (size_t g = 0; g < G; ++g) {
    double s = 0, p = 0;
    for (size_t m = 0; m < n; ++m) {
      s += cm.dyn[m][g];
      p += cm.per[m][g];
      EXPECT_EQ(cm.dyn[m][g], store[m][g] + dyn[g] - mean[g]);
    }
    EXPECT_NEAR(s / n, dyn[g], 1e-12);
    EXPECT_NEAR(p / n, per[g], 1e-12);
  }
}

TEST(AbcTest, SingleMemberAndClipping) {
  const std::vector<double> m = {1.0, 2.0};
  std::vector<std::span<const double>> members = {m};
  const std::vector<double> dyn = {0.5, 2.5}, per = {-0.5, 3.0}, cl = {1.5, -2.0};
  const auto t = abc_probabilistic(members, dyn, per, cl, m, Variable::kTemperature);
  EXPECT_EQ(std::vector<double>(t[0].members().begin(), t[0].members().end()),
            (std::vector<double>{-0.5, 0.5, 1.5}));
  const auto p = abc_probabilistic(members, dyn, per, cl, m, Variable::kPrecipitation);
  EXPECT_EQ(std::vector<double>(p[0].members().begin(), p[0].members().end()),
            (std::vector<double>{0.0, 0.5, 1.5}));
  EXPECT_EQ(p[1].members()[0], 0.0);
}

TEST(BaselineProbabilisticTest, ShiftAndClip) {
  const std::vector<double> a = {1.0}, b = {3.0}, c = {8.0};
  std::vector<std::span<const double>> members = {a, b, c};
  const std::vector<double> mean = {4.0};
  const auto same = baseline_probabilistic(members, mean, mean, Variable::kTemperature);
  EXPECT_EQ(std::vector<double>(same[0].members().begin(), same[0].members().end()),
            (std::vector<double>{1.0, 3.0, 8.0}));
  const std::vector<double> det = {2.5};
  const auto shifted = baseline_probabilistic(members, det, mean, Variable::kTemperature);
  EXPECT_EQ(std::vector<double>(shifted[0].members().begin(), shifted[0].members().end()),
            (std::vector<double>{-0.5, 1.5, 6.5}));
  const auto clipped = baseline_probabilistic(members, det, mean, Variable::kPrecipitation);
  EXPECT_EQ(clipped[0].members()[0], 0.0);
  EXPECT_EQ(clipped[0].members()[2], 6.5);
}

TEST(GuardTest, RejectsUnobservableReads) {
  const CalendarDate t_star(2010, 3, 1);
  AccessAudit audit;
  const DataGuard g = guard_at(t_star, &audit);
  EXPECT_NO_THROW(g.obs(t_star - 30));
  EXPECT_THROW(g.obs(t_star - 29), LeakageError);
  EXPECT_NO_THROW(g.forecast(t_star - 15));
  EXPECT_THROW(g.forecast(t_star - 14), LeakageError);
  EXPECT_EQ(audit.violations(), 2u);
  EXPECT_EQ(audit.max_obs_excess(), 1);
  EXPECT_FALSE(g.obs_allowed(t_star - 29));
}

}  // namespace
}  // namespace subseas
