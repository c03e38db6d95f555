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

#include "subseas/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "subseas/dataset_io.h"
#include "subseas/error.h"
#include "subseas/parallel.h"
#include "subseas/random.h"

namespace subseas {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kIndexPeriodAr = 0.95;
constexpr int kPhaseCount = 8;
constexpr int kPhaseDays = 6;

int weekday(CalendarDate d) {  // 0 = Monday; 1970-01-01 was a Thursday
  return static_cast<int>(((d.ordinal() + 3) % 7 + 7) % 7);
}

double day_of_year(CalendarDate d) {
  return static_cast<double>(d - CalendarDate(d.year(), 1, 1));
}

double daily_ar(double period_ar) {
  return std::pow(period_ar, 1.0 / kPeriodLength);
}

// Unit-variance AR(1) path of length n.
std::vector<double> ar_path(NormalStream& z, size_t n, double phi) {
  std::vector<double> out(n);
  const double innov = std::sqrt(1.0 - phi * phi);
  double a = z();
  for (size_t t = 0; t < n; ++t) {
    if (t > 0) a = phi * a + innov * z();
    out[t] = a;
  }
  return out;
}

std::vector<int> effective_leads(const ScenarioConfig& cfg) {
  if (!cfg.leads.empty()) return cfg.leads;
  std::vector<int> out;
  for (int l = 0; l <= 29; ++l) out.push_back(l);
  return out;
}

}  // namespace

std::string_view bias_kind_name(BiasKind k) {
  switch (k) {
    case BiasKind::kConstant:
      return "constant";
    case BiasKind::kSeasonal:
      return "seasonal";
    case BiasKind::kRegional:
      return "regional";
    case BiasKind::kMultiplicative:
      return "multiplicative";
  }
  return "constant";
}

BiasKind parse_bias_kind(std::string_view s) {
  if (s == "constant") return BiasKind::kConstant;
  if (s == "seasonal") return BiasKind::kSeasonal;
  if (s == "regional") return BiasKind::kRegional;
  if (s == "multiplicative") return BiasKind::kMultiplicative;
  throw ConfigError("unknown bias kind '" + std::string(s) + "'");
}

void validate_scenario(const ScenarioConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError("scenario: " + m); };
  if (c.grid_rows < 1 || c.grid_cols < 1) fail("grid must have at least one point");
  if (c.first_year > c.last_year) fail("empty year range");
  if (c.noise < 0 || c.member_spread < 0 || c.anomaly_std < 0) fail("sigma, tau and anomaly_std must be >= 0");
  if (c.rho < 0 || c.rho > 1) fail("rho must be in [0, 1]");
  if (c.members < 1) fail("ensemble size must be >= 1");
  if (c.period_ar < 0 || c.period_ar >= 1) fail("period_ar must be in [0, 1)");
  if (c.spatial_coherence < 0 || c.spatial_coherence > 1) fail("spatial_coherence must be in [0, 1]");
  if (c.lead_decay < 0) fail("lead_decay must be >= 0");
  if (c.explanatory_indices < 0) fail("explanatory_indices must be >= 0");
  for (int l : c.leads) {
    if (l < 0) fail("leads must be >= 0");
  }
  for (int w : c.issuance_weekdays) {
    if (w < 0 || w > 6) fail("issuance weekdays must be in 0..6");
  }
}

Scenario generate_scenario(const ScenarioConfig& cfg, int jobs) {
  validate_scenario(cfg);
  const Grid grid = Grid::Lattice(cfg.lat0, cfg.lon0, cfg.grid_step,
                                  static_cast<size_t>(cfg.grid_rows),
                                  static_cast<size_t>(cfg.grid_cols));
  const size_t G = grid.size();
  const CalendarDate start(cfg.first_year, 1, 1);
  const CalendarDate end(cfg.last_year, 12, 31);
  const size_t T = static_cast<size_t>(end - start + 1);
  std::vector<CalendarDate> dates(T);
  for (size_t t = 0; t < T; ++t) dates[t] = start + static_cast<int64_t>(t);

  const std::vector<int> leads = effective_leads(cfg);
  const int max_lead = *std::max_element(leads.begin(), leads.end());
  std::vector<size_t> issuances;  // day index of each issuance
  for (size_t t = 0; t + static_cast<size_t>(max_lead) < T; ++t) {
    if (cfg.issuance_weekdays.empty() ||
        std::find(cfg.issuance_weekdays.begin(), cfg.issuance_weekdays.end(),
                  weekday(dates[t])) != cfg.issuance_weekdays.end()) {
      issuances.push_back(t);
    }
  }

  const double phi = daily_ar(cfg.period_ar);
  const double mid_lat = cfg.lat0 + cfg.grid_step * (cfg.grid_rows - 1) / 2.0;
  const bool precip = cfg.variable == Variable::kPrecipitation;

  // Explanatory indices, shared by all points.
  Scenario s;
  s.config = cfg;
  ExplanatorySeries& ex = s.explanatory;
  if (cfg.explanatory_indices > 0 || cfg.explanatory_phase) {
    ex.dates = dates;
    for (int k = 0; k < cfg.explanatory_indices; ++k) {
      NormalStream z(derive_seed(cfg.seed, "index", static_cast<uint64_t>(k)));
      ex.names.push_back("index" + std::to_string(k + 1));
      ex.categorical.push_back(false);
      ex.values.push_back(ar_path(z, T, daily_ar(kIndexPeriodAr)));
    }
    if (cfg.explanatory_phase) {
      const uint64_t offset = derive_seed(cfg.seed, "phase") % (kPhaseCount * kPhaseDays);
      std::vector<double> phase(T);
      for (size_t t = 0; t < T; ++t) {
        phase[t] = static_cast<double>(((t + offset) / kPhaseDays) % kPhaseCount + 1);
      }
      ex.names.push_back("phase");
      ex.categorical.push_back(true);
      ex.values.push_back(std::move(phase));
    }
  }
  std::vector<double> error_scale(T, 1.0);
  if (cfg.opportunity_strength > 0.0 && cfg.explanatory_indices > 0) {
    for (size_t t = 0; t < T; ++t) {
      error_scale[t] = std::clamp(
          1.0 - cfg.opportunity_strength * std::tanh(ex.values[0][t]), 0.1, 2.0);
    }
  }

  NormalStream zc(derive_seed(cfg.seed, "common"));
  const std::vector<double> common = ar_path(zc, T, phi);

  std::vector<double> obs(T * G), bias(T * G), seasonal(T * G), anomaly(T * G);
  const size_t L = leads.size();
  const size_t n = static_cast<size_t>(cfg.members);
  std::vector<double> fc(issuances.size() * L * n * G);

  parallel_for(G, jobs, [&](size_t g) {
    const GridPoint p = grid[g];
    const bool north = p.lat > mid_lat;
    const double factor = north ? cfg.bias.wet_factor : cfg.bias.dry_factor;
    NormalStream zl(derive_seed(cfg.seed, "local", g));
    NormalStream zn(derive_seed(cfg.seed, "noise", g));
    const std::vector<double> local = ar_path(zl, T, phi);
    const double wc = std::sqrt(cfg.spatial_coherence);
    const double wl = std::sqrt(1.0 - cfg.spatial_coherence);
    for (size_t t = 0; t < T; ++t) {
      const double doy = day_of_year(dates[t]);
      const double c = cfg.base_value + cfg.latitude_gradient * (p.lat - cfg.lat0) +
                       cfg.seasonal_amplitude * std::cos(kTwoPi * (doy - 200.0) / kDaysPerYear);
      const double a = cfg.anomaly_std * (wc * common[t] + wl * local[t]);
      seasonal[t * G + g] = c;
      anomaly[t * G + g] = a;
      double y = c + a + cfg.noise * zn();
      if (precip) y = std::max(y, 0.0);
      obs[t * G + g] = y;
      double b = 0.0;
      switch (cfg.bias.kind) {
        case BiasKind::kConstant:
          b = cfg.bias.offset;
          break;
        case BiasKind::kSeasonal:
          b = cfg.bias.offset +
              cfg.bias.seasonal_amplitude *
                  std::cos(kTwoPi * (doy - cfg.bias.seasonal_peak_day) / kDaysPerYear);
          break;
        case BiasKind::kRegional:
          b = north ? cfg.bias.north : cfg.bias.south;
          break;
        case BiasKind::kMultiplicative:
          b = (factor - 1.0) * c;
          break;
      }
      bias[t * G + g] = b;
    }
    NormalStream zf(derive_seed(cfg.seed, "forecast", g));
    for (size_t k = 0; k < issuances.size(); ++k) {
      const size_t i = issuances[k];
      for (size_t li = 0; li < L; ++li) {
        const size_t t = i + static_cast<size_t>(leads[li]);
        const double rho = cfg.rho * std::exp(-cfg.lead_decay * leads[li]);
        const double e = zf();
        const double signal = seasonal[t * G + g] + rho * anomaly[t * G + g] +
                              std::sqrt(1.0 - rho * rho) * cfg.anomaly_std *
                                  error_scale[i] * e;
        for (size_t m = 0; m < n; ++m) {
          double v = signal + cfg.member_spread * zf();
          if (cfg.bias.kind == BiasKind::kMultiplicative) {
            v *= factor;
          } else {
            v += bias[t * G + g];
          }
          if (precip) v = std::max(v, 0.0);
          fc[((k * L + li) * n + m) * G + g] = v;
        }
      }
    }
  });

  s.obs = FieldSeries::Dense(grid, dates, std::move(obs), precip ? "mm" : "degC");
  s.truth_bias = FieldSeries::Dense(grid, dates, std::move(bias), precip ? "mm" : "degC");
  ForecastArchive::Builder builder(grid);
  std::vector<double> row(G);
  for (size_t k = 0; k < issuances.size(); ++k) {
    const CalendarDate issuance = dates[issuances[k]];
    const Era era = cfg.forecast_start_year > 0 && issuance.year() < cfg.forecast_start_year
                        ? Era::kReforecast
                        : Era::kForecast;
    for (size_t li = 0; li < L; ++li) {
      for (size_t m = 0; m < n; ++m) {
        const double* src = fc.data() + ((k * L + li) * n + m) * G;
        builder.add({issuance, leads[li], static_cast<int>(m)}, era,
                    std::span<const double>(src, G));
      }
    }
  }
  s.archive = std::move(builder).build();
  return s;
}

void write_scenario(const Scenario& s, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  store_observations(s.obs, (d / "obs.csv").string());
  store_forecasts(s.archive, (d / "forecasts.csv").string());
  store_observations(s.truth_bias, (d / "truth_bias.csv").string(), "injected_bias");
  const ExplanatorySeries& ex = s.explanatory;
  if (ex.names.empty()) return;
  std::string csv = "date";
  for (const auto& n : ex.names) csv += "," + n;
  csv += "\n";
  for (size_t t = 0; t < ex.dates.size(); ++t) {
    csv += ex.dates[t].iso();
    for (const auto& v : ex.values) csv += "," + format_double(v[t]);
    csv += "\n";
  }
  write_file_atomic((d / "explanatory.csv").string(), csv);
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
  for (size_t k = 0; k < ex.names.size(); ++k) {
    manifest[ex.names[k]] = {{"kind", ex.categorical[k] ? "categorical" : "continuous"},
                             {"lag_days", 30}};
  }
  write_file_atomic((d / "explanatory_manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace subseas
