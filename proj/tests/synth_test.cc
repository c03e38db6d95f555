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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "subseas/error.h"
#include "subseas/synth.h"
#include "test_util.h"

namespace subseas {
namespace {

ScenarioConfig small(uint64_t seed = 1) {
  ScenarioConfig c;
  c.grid_rows = 2;
  c.grid_cols = 3;
  c.first_year = 2000;
  c.last_year = 2001;
  c.members = 3;
  c.leads = {15, 29};
  c.seed = seed;
  return c;
}

// All randomness switched off: obs = climate signal, forecasts = biased signal.
ScenarioConfig noiseless(BiasKind kind) {
  ScenarioConfig c = small();
  c.noise = 0;
  c.anomaly_std = 0;
  c.member_spread = 0;
  c.bias.kind = kind;
  c.bias.offset = 2.0;
  c.bias.seasonal_amplitude = 1.5;
  c.bias.north = 4.0;
  c.bias.south = -1.0;
  c.bias.wet_factor = 1.3;
  c.bias.dry_factor = 0.8;
  return c;
}

TEST(SynthTest, DeterministicInSeedAndJobs) {
  const Scenario a = generate_scenario(small(5));
  const Scenario b = generate_scenario(small(5), 4);
  EXPECT_TRUE(a.obs == b.obs);
  EXPECT_TRUE(a.archive == b.archive);
  EXPECT_TRUE(a.truth_bias == b.truth_bias);
  const Scenario c = generate_scenario(small(6));
  EXPECT_FALSE(a.obs == c.obs);
  EXPECT_FALSE(a.archive == c.archive);
}

TEST(SynthTest, EnsembleMeanMinusTruthIsInjectedBias) {
  for (BiasKind kind : {BiasKind::kConstant, BiasKind::kSeasonal, BiasKind::kRegional,
                        BiasKind::kMultiplicative}) {
    const Scenario s = generate_scenario(noiseless(kind));
    size_t checked = 0;
    for (size_t r = 0; r + 29 < s.obs.num_dates(); r += 17) {
      const CalendarDate issuance = s.obs.date(r);
      for (int lead : {15, 29}) {
        auto m = s.archive.ensemble_mean(issuance, lead);
        ASSERT_TRUE(m);
        auto tr = s.obs.row_of(issuance + lead);
        for (size_t g = 0; g < s.obs.num_points(); ++g) {
          EXPECT_NEAR((*m)[g] - s.obs.at(*tr, g), s.truth_bias.at(*tr, g), 1e-9)
              << bias_kind_name(kind);
          ++checked;
        }
      }
    }
    EXPECT_GT(checked, 100u);
  }
}

TEST(SynthTest, BiasShapes) {
  const Scenario c = generate_scenario(noiseless(BiasKind::kConstant));
  for (size_t r = 0; r < c.truth_bias.num_dates(); ++r) EXPECT_EQ(c.truth_bias.at(r, 0), 2.0);
  const Scenario reg = generate_scenario(noiseless(BiasKind::kRegional));
  std::set<double> seen;
  for (size_t g = 0; g < reg.obs.num_points(); ++g) {
    const double b = reg.truth_bias.at(0, g);
    EXPECT_EQ(b, reg.obs.grid()[g].lat > 31.0 ? 4.0 : -1.0);
    seen.insert(b);
  }
  EXPECT_EQ(seen.size(), 2u);
  const Scenario sea = generate_scenario(noiseless(BiasKind::kSeasonal));
  double lo = 1e9, hi = -1e9;
  for (size_t r = 0; r < sea.truth_bias.num_dates(); ++r) {
    lo = std::min(lo, sea.truth_bias.at(r, 0));
    hi = std::max(hi, sea.truth_bias.at(r, 0));
  }
  EXPECT_NEAR(lo, 0.5, 1e-3);
  EXPECT_NEAR(hi, 3.5, 1e-3);
}

TEST(SynthTest, ConstantBiasSurvivesNoise) {
  ScenarioConfig cfg = small(11);
  cfg.bias.offset = 5.0;
  cfg.last_year = 2003;
  const Scenario s = generate_scenario(cfg);
  double sum = 0;
  size_t n = 0;
  for (size_t r = 0; r + 15 < s.obs.num_dates(); ++r) {
    auto m = s.archive.ensemble_mean(s.obs.date(r), 15);
    auto tr = s.obs.row_of(s.obs.date(r) + 15);
    for (size_t g = 0; g < s.obs.num_points(); ++g) {
      sum += (*m)[g] - s.obs.at(*tr, g);
      ++n;
    }
  }
  EXPECT_NEAR(sum / n, 5.0, 0.1);
}

TEST(SynthTest, RhoControlsForecastQuality) {
  auto rmse = [](double rho) {
    ScenarioConfig cfg = small(21);
    cfg.rho = rho;
    cfg.noise = 0.2;
    const Scenario s = generate_scenario(cfg);
    double se = 0;
    size_t n = 0;
    for (size_t r = 0; r + 15 < s.obs.num_dates(); ++r) {
      auto m = s.archive.ensemble_mean(s.obs.date(r), 15);
      auto tr = s.obs.row_of(s.obs.date(r) + 15);
      for (size_t g = 0; g < s.obs.num_points(); ++g) {
        const double e = (*m)[g] - s.obs.at(*tr, g);
        se += e * e;
        ++n;
      }
    }
    return std::sqrt(se / n);
  };
  EXPECT_LT(rmse(0.95), rmse(0.5));
  EXPECT_LT(rmse(0.5), rmse(0.0));
}

TEST(SynthTest, IssuanceCalendarErasAndPrecip) {
  ScenarioConfig cfg = small();
  cfg.issuance_weekdays = {0, 3};
  cfg.forecast_start_year = 2001;
  cfg.variable = Variable::kPrecipitation;
  cfg.base_value = 1.0;
  const Scenario s = generate_scenario(cfg);
  for (size_t i = 0; i < s.archive.size(); ++i) {
    const auto& e = s.archive.entry(i);
    const int wd = static_cast<int>(((e.key.issuance.ordinal() % 7) + 10) % 7);  // 1970-01-01 was a Thursday
    EXPECT_TRUE(wd == 0 || wd == 3);
    EXPECT_EQ(e.era, e.key.issuance.year() < 2001 ? Era::kReforecast : Era::kForecast);
    for (double v : s.archive.values(i)) EXPECT_GE(v, 0.0);
  }
  for (size_t r = 0; r < s.obs.num_dates(); ++r) {
    for (size_t g = 0; g < s.obs.num_points(); ++g) EXPECT_GE(s.obs.at(r, g), 0.0);
  }
}

TEST(SynthTest, ExplanatorySeriesAndOpportunity) {
  ScenarioConfig cfg = small(31);
  cfg.last_year = 2005;
  cfg.explanatory_indices = 2;
  cfg.explanatory_phase = true;
  cfg.opportunity_strength = 0.8;
  cfg.noise = 0.1;
  cfg.member_spread = 0.1;
  const Scenario s = generate_scenario(cfg);
  const auto& ex = s.explanatory;
  ASSERT_EQ(ex.names, (std::vector<std::string>{"index1", "index2", "phase"}));
  EXPECT_EQ(ex.categorical, (std::vector<bool>{false, false, true}));
  std::set<double> phases(ex.values[2].begin(), ex.values[2].end());
  EXPECT_GE(phases.size(), 2u);
  for (double p : phases) EXPECT_EQ(p, std::round(p));

  // Forecast errors shrink when the first index is high.
  double hi = 0, lo = 0;
  size_t nh = 0, nl = 0;
  for (size_t t = 0; t + 15 < ex.dates.size(); ++t) {
    auto m = s.archive.ensemble_mean(ex.dates[t], 15);
    auto tr = s.obs.row_of(ex.dates[t] + 15);
    double e2 = 0;
    for (size_t g = 0; g < s.obs.num_points(); ++g) {
      const double e = (*m)[g] - s.obs.at(*tr, g);
      e2 += e * e;
    }
    if (ex.values[0][t] > 0.5) {
      hi += e2;
      ++nh;
    } else if (ex.values[0][t] < -0.5) {
      lo += e2;
      ++nl;
    }
  }
  ASSERT_GT(nh, 50u);
  ASSERT_GT(nl, 50u);
  EXPECT_LT(hi / nh, lo / nl);

  testing::TempDir dir("synth");
  write_scenario(s, dir.str());
  for (const char* f : {"obs.csv", "forecasts.csv", "truth_bias.csv", "explanatory.csv",
                        "explanatory_manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  }
  std::ifstream in(dir.path() / "truth_bias.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "date,lat,lon,injected_bias");
}

TEST(SynthTest, Validation) {
  auto bad = [](auto mutate) {
    ScenarioConfig c = small();
    mutate(c);
    EXPECT_THROW(validate_scenario(c), ConfigError);
  };
  bad([](ScenarioConfig& c) { c.grid_rows = 0; });
  bad([](ScenarioConfig& c) { c.first_year = 2003; });
  bad([](ScenarioConfig& c) { c.rho = 1.2; });
  bad([](ScenarioConfig& c) { c.members = 0; });
  bad([](ScenarioConfig& c) { c.leads = {-1}; });
  bad([](ScenarioConfig& c) { c.issuance_weekdays = {7}; });
  bad([](ScenarioConfig& c) { c.period_ar = 1.0; });
  EXPECT_THROW(parse_bias_kind("linear"), ConfigError);
  EXPECT_EQ(parse_bias_kind("seasonal"), BiasKind::kSeasonal);
}

}  // namespace
}  // namespace subseas
