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

#include "subseas/app.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "subseas/baselines.h"
#include "subseas/climatology.h"
#include "subseas/correctors.h"
#include "subseas/dataset_io.h"
#include "subseas/error.h"
#include "subseas/explain.h"
#include "subseas/log.h"
#include "subseas/metrics.h"
#include "subseas/pipeline.h"
#include "subseas/random.h"
#include "subseas/synth.h"

namespace subseas::app {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config access

class Config {
 public:
  Config(std::string_view text, std::set<std::string> allowed) {
    try {
      j_ = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j_.is_object()) throw ConfigError("config must be a JSON object");
    allowed.insert({"base_dir", "seed", "jobs"});
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) throw ConfigError("unknown config key '" + k + "'");
    }
    base_ = fs::path(str("base_dir", "."));
  }

  const json& raw() const { return j_; }
  bool has(const std::string& k) const { return j_.contains(k) && !j_[k].is_null(); }

  std::string str(const std::string& k, std::optional<std::string> def = std::nullopt) const {
    if (!has(k)) {
      if (def) return *def;
      throw ConfigError("missing config key '" + k + "'");
    }
    if (!j_[k].is_string()) throw ConfigError("config key '" + k + "' must be a string");
    return j_[k].get<std::string>();
  }
  int64_t integer(const std::string& k, std::optional<int64_t> def = std::nullopt) const {
    if (!has(k)) {
      if (def) return *def;
      throw ConfigError("missing config key '" + k + "'");
    }
    if (!j_[k].is_number_integer()) throw ConfigError("config key '" + k + "' must be an integer");
    return j_[k].get<int64_t>();
  }
  double number(const std::string& k, double def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number()) throw ConfigError("config key '" + k + "' must be a number");
    return j_[k].get<double>();
  }
  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_[k].is_boolean()) throw ConfigError("config key '" + k + "' must be true or false");
    return j_[k].get<bool>();
  }
  // Existing input file, resolved against base_dir.
  std::string input(const std::string& k) const { return resolve_input(str(k), k); }
  std::string resolve_input(const std::string& p, const std::string& k) const {
    fs::path path(p);
    if (path.is_relative()) path = base_ / path;
    if (!fs::is_regular_file(path)) {
      throw ConfigError("input file for '" + k + "' not found: " + path.string());
    }
    return path.string();
  }
  CalendarDate date(const std::string& k) const {
    const std::string s = str(k);
    try {
      return CalendarDate::Parse(s);
    } catch (const DomainError& e) {
      throw ConfigError("config key '" + k + "': " + e.what());
    }
  }
  uint64_t seed() const {
    if (!has("seed")) return 0;
    if (!j_["seed"].is_number_unsigned() && !j_["seed"].is_number_integer()) {
      throw ConfigError("config key 'seed' must be a non-negative integer");
    }
    const int64_t s = j_["seed"].get<int64_t>();
    if (s < 0) throw ConfigError("config key 'seed' must be a non-negative integer");
    return static_cast<uint64_t>(s);
  }
  int jobs() const {
    const int64_t j = integer("jobs", 1);
    if (j < 1) throw ConfigError("config key 'jobs' must be >= 1");
    return static_cast<int>(j);
  }
  TaskSpec task() const { return TaskSpec::Parse(str("task", "tmp2m_34w")); }
  YearRange years(const std::string& k) const {
    if (!has(k)) throw ConfigError("missing config key '" + k + "'");
    const json& v = j_[k];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
      throw ConfigError("config key '" + k + "' must be [first_year, last_year]");
    }
    YearRange r{v[0].get<int>(), v[1].get<int>()};
    if (r.first > r.last) throw ConfigError("config key '" + k + "' is an empty year range");
    return r;
  }

 private:
  json j_;
  fs::path base_;
};

template <typename T>
T field(const json& obj, const char* key, T def, const char* where) {
  if (!obj.contains(key) || obj[key].is_null()) return def;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

// ---------------------------------------------------------------------------
// Output staging: everything is rendered in memory and written at the end.

class Outputs {
 public:
  void add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }
  std::vector<std::string> commit(const std::string& dir) {
    fs::create_directories(dir);
    const std::string lock_path = (fs::path(dir) / ".subseas.lock").string();
    const int fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot open lock file " + lock_path);
    if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd);
      throw IoError("output directory " + dir + " is in use by another run");
    }
    std::vector<std::string> names;
    try {
      for (const auto& [name, content] : files_) {
        write_file_atomic((fs::path(dir) / name).string(), content);
        names.push_back(name);
      }
    } catch (...) {
      ::flock(fd, LOCK_UN);
      ::close(fd);
      throw;
    }
    ::flock(fd, LOCK_UN);
    ::close(fd);
    return names;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

// Collects warnings emitted while a command runs.
class WarningCapture {
 public:
  WarningCapture() {
    prev_ = log::set_sink([this](log::Level level, std::string_view msg) {
      if (level == log::Level::kWarning) warnings_.emplace_back(msg);
      if (prev_) prev_(level, msg);
    });
  }
  ~WarningCapture() { log::set_sink(prev_); }
  std::vector<std::string> take() { return std::move(warnings_); }

 private:
  log::Sink prev_;
  std::vector<std::string> warnings_;
};

std::string temp_path(const std::string& name) {
  static int counter = 0;
  return (fs::temp_directory_path() /
          ("subseas-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + name))
      .string();
}

// Renders via the dataset writers (which write files) into a string.
template <typename Fn>
std::string render(const std::string& name, Fn fn) {
  const std::string p = temp_path(name);
  fn(p);
  std::string s = read_file(p);
  fs::remove(p);
  return s;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : ""; }

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string spatial_csv(const Grid& grid, std::span<const double> values) {
  std::string out = "lat,lon,value\n";
  for (size_t g = 0; g < grid.size(); ++g) {
    out += format_double(grid[g].lat) + "," + format_double(grid[g].lon) + "," +
           num(values[g]) + "\n";
  }
  return out;
}

// Deterministic forecasts (member -1) keyed by target date.
FieldSeries deterministic_series(const ForecastArchive& a, const std::string& path) {
  std::map<int64_t, size_t> by_target;
  for (size_t i = 0; i < a.size(); ++i) {
    const auto& k = a.entry(i).key;
    if (k.member != kDeterministicMember) continue;
    if (!by_target.emplace(k.target().ordinal(), i).second) {
      throw DataError(path + ": more than one deterministic forecast for target " +
                      k.target().iso());
    }
  }
  std::vector<CalendarDate> dates;
  std::vector<double> values;
  for (const auto& [t, i] : by_target) {
    dates.push_back(CalendarDate::FromOrdinal(t));
    auto v = a.values(i);
    values.insert(values.end(), v.begin(), v.end());
  }
  if (dates.empty()) throw DataError(path + ": no deterministic (member -1) forecasts");
  return FieldSeries::Dense(a.grid(), std::move(dates), std::move(values));
}

ForecastArchive deterministic_archive(const FieldSeries& f, const TaskSpec& task) {
  ForecastArchive::Builder b(f.grid());
  for (size_t r = 0; r < f.num_dates(); ++r) {
    b.add({f.date(r) - task.lead, task.lead, kDeterministicMember}, Era::kForecast, f.row(r));
  }
  return std::move(b).build();
}

ForecastArchive ensemble_archive(const FieldSeries& f, const TaskSpec& task,
                                 const std::vector<std::vector<EmpiricalDistribution>>& ens) {
  ForecastArchive::Builder b(f.grid());
  const size_t G = f.num_points();
  for (size_t r = 0; r < f.num_dates(); ++r) {
    const size_t n = ens[r].front().size();
    std::vector<double> row(G);
    for (size_t m = 0; m < n; ++m) {
      for (size_t g = 0; g < G; ++g) row[g] = ens[r][g].members()[m];
      b.add({f.date(r) - task.lead, task.lead, static_cast<int>(m)}, Era::kForecast, row);
    }
  }
  return std::move(b).build();
}

// ---------------------------------------------------------------------------
// generate

ScenarioConfig parse_scenario(const json& s, uint64_t seed) {
  static const std::set<std::string> keys = {
      "variable", "grid_rows", "grid_cols", "lat0", "lon0", "grid_step",
      "first_year", "last_year", "base_value", "seasonal_amplitude",
      "latitude_gradient", "anomaly_std", "period_ar", "spatial_coherence",
      "noise", "bias", "members", "member_spread", "rho", "lead_decay", "leads",
      "issuance_weekdays", "forecast_start_year", "explanatory_indices",
      "explanatory_phase", "opportunity_strength"};
  check_keys(s, keys, "scenario");
  ScenarioConfig c;
  c.seed = seed;
  const std::string var = field<std::string>(s, "variable", "tmp2m", "scenario");
  if (var == "tmp2m") {
    c.variable = Variable::kTemperature;
  } else if (var == "precip") {
    c.variable = Variable::kPrecipitation;
  } else {
    throw ConfigError("scenario.variable must be tmp2m or precip");
  }
  c.grid_rows = field(s, "grid_rows", c.grid_rows, "scenario");
  c.grid_cols = field(s, "grid_cols", c.grid_cols, "scenario");
  c.lat0 = field(s, "lat0", c.lat0, "scenario");
  c.lon0 = field(s, "lon0", c.lon0, "scenario");
  c.grid_step = field(s, "grid_step", c.grid_step, "scenario");
  c.first_year = field(s, "first_year", c.first_year, "scenario");
  c.last_year = field(s, "last_year", c.last_year, "scenario");
  c.base_value = field(s, "base_value", c.base_value, "scenario");
  c.seasonal_amplitude = field(s, "seasonal_amplitude", c.seasonal_amplitude, "scenario");
  c.latitude_gradient = field(s, "latitude_gradient", c.latitude_gradient, "scenario");
  c.anomaly_std = field(s, "anomaly_std", c.anomaly_std, "scenario");
  c.period_ar = field(s, "period_ar", c.period_ar, "scenario");
  c.spatial_coherence = field(s, "spatial_coherence", c.spatial_coherence, "scenario");
  c.noise = field(s, "noise", c.noise, "scenario");
  c.members = field(s, "members", c.members, "scenario");
  c.member_spread = field(s, "member_spread", c.member_spread, "scenario");
  c.rho = field(s, "rho", c.rho, "scenario");
  c.lead_decay = field(s, "lead_decay", c.lead_decay, "scenario");
  c.leads = field(s, "leads", c.leads, "scenario");
  c.issuance_weekdays = field(s, "issuance_weekdays", c.issuance_weekdays, "scenario");
  c.forecast_start_year = field(s, "forecast_start_year", c.forecast_start_year, "scenario");
  c.explanatory_indices = field(s, "explanatory_indices", c.explanatory_indices, "scenario");
  c.explanatory_phase = field(s, "explanatory_phase", c.explanatory_phase, "scenario");
  c.opportunity_strength = field(s, "opportunity_strength", c.opportunity_strength, "scenario");
  if (s.contains("bias")) {
    const json& b = s["bias"];
    check_keys(b, {"kind", "offset", "seasonal_amplitude", "seasonal_peak_day", "north",
                   "south", "wet_factor", "dry_factor"},
               "scenario.bias");
    c.bias.kind = parse_bias_kind(field<std::string>(b, "kind", "constant", "scenario.bias"));
    c.bias.offset = field(b, "offset", c.bias.offset, "scenario.bias");
    c.bias.seasonal_amplitude =
        field(b, "seasonal_amplitude", c.bias.seasonal_amplitude, "scenario.bias");
    c.bias.seasonal_peak_day =
        field(b, "seasonal_peak_day", c.bias.seasonal_peak_day, "scenario.bias");
    c.bias.north = field(b, "north", c.bias.north, "scenario.bias");
    c.bias.south = field(b, "south", c.bias.south, "scenario.bias");
    c.bias.wet_factor = field(b, "wet_factor", c.bias.wet_factor, "scenario.bias");
    c.bias.dry_factor = field(b, "dry_factor", c.bias.dry_factor, "scenario.bias");
  }
  validate_scenario(c);
  return c;
}

json scenario_json(const ScenarioConfig& c) {
  json b = {{"kind", bias_kind_name(c.bias.kind)},
            {"offset", c.bias.offset},
            {"seasonal_amplitude", c.bias.seasonal_amplitude},
            {"seasonal_peak_day", c.bias.seasonal_peak_day},
            {"north", c.bias.north},
            {"south", c.bias.south},
            {"wet_factor", c.bias.wet_factor},
            {"dry_factor", c.bias.dry_factor}};
  return {{"seed", c.seed},
          {"variable", c.variable == Variable::kTemperature ? "tmp2m" : "precip"},
          {"grid_rows", c.grid_rows},
          {"grid_cols", c.grid_cols},
          {"lat0", c.lat0},
          {"lon0", c.lon0},
          {"grid_step", c.grid_step},
          {"first_year", c.first_year},
          {"last_year", c.last_year},
          {"base_value", c.base_value},
          {"seasonal_amplitude", c.seasonal_amplitude},
          {"latitude_gradient", c.latitude_gradient},
          {"anomaly_std", c.anomaly_std},
          {"period_ar", c.period_ar},
          {"spatial_coherence", c.spatial_coherence},
          {"noise", c.noise},
          {"bias", b},
          {"members", c.members},
          {"member_spread", c.member_spread},
          {"rho", c.rho},
          {"lead_decay", c.lead_decay},
          {"leads", c.leads},
          {"issuance_weekdays", c.issuance_weekdays},
          {"forecast_start_year", c.forecast_start_year},
          {"explanatory_indices", c.explanatory_indices},
          {"explanatory_phase", c.explanatory_phase},
          {"opportunity_strength", c.opportunity_strength}};
}

// ---------------------------------------------------------------------------
// correct

std::vector<DynppConfig> parse_dynpp_grid(const json& arr, const TaskSpec& task, bool custom) {
  if (!arr.is_array()) throw ConfigError("grids.dynpp must be an array");
  std::vector<DynppConfig> out;
  for (const auto& e : arr) {
    check_keys(e, {"span", "issuances", "leads", "training_years"}, "grids.dynpp[]");
    DynppConfig c;
    c.span = field(e, "span", 0, "grids.dynpp[]");
    c.issuances = field(e, "issuances", 1, "grids.dynpp[]");
    c.leads = LeadSet::Parse(field<std::string>(e, "leads", std::to_string(task.lead), "grids.dynpp[]"));
    c.training_years = field(e, "training_years", kDynppTrainingYears, "grids.dynpp[]");
    if (c.issuances < 1 || c.span < 0 || c.training_years < 0) {
      throw ConfigError("grids.dynpp entry out of range");
    }
    if (!custom) validate_dynpp_config(c, task);
    out.push_back(c);
  }
  if (out.empty()) throw ConfigError("grids.dynpp is empty");
  return out;
}

std::vector<ClimppConfig> parse_climpp_grid(const json& arr, const TaskSpec& task, bool custom) {
  if (!arr.is_array()) throw ConfigError("grids.climpp must be an array");
  std::vector<ClimppConfig> out;
  for (const auto& e : arr) {
    check_keys(e, {"span", "years", "loss"}, "grids.climpp[]");
    ClimppConfig c = climpp_default(task);
    c.span = field(e, "span", c.span, "grids.climpp[]");
    if (e.contains("years")) {
      if (e["years"].is_string() && e["years"] == "all") {
        c.years.reset();
      } else if (e["years"].is_number_integer()) {
        c.years = e["years"].get<int>();
      } else {
        throw ConfigError("grids.climpp[].years must be \"all\" or an integer");
      }
    }
    if (e.contains("loss")) {
      const std::string l = field<std::string>(e, "loss", "rmse", "grids.climpp[]");
      if (l == "rmse") {
        c.loss = Loss::kRMSE;
      } else if (l == "mse") {
        c.loss = Loss::kMSE;
      } else {
        throw ConfigError("grids.climpp[].loss must be rmse or mse");
      }
    }
    if (c.span < 0) throw ConfigError("grids.climpp entry out of range");
    if (!custom) validate_climpp_config(c, task);
    out.push_back(c);
  }
  if (out.empty()) throw ConfigError("grids.climpp is empty");
  return out;
}

ReforecastProtocol parse_protocol(const json& o) {
  check_keys(o, {"mode", "lookback_years", "day_window", "hindcast", "era", "issuance_count",
                 "issuance_stride"},
             "opdebias");
  ReforecastProtocol p;
  p.era = EraSelector::kAny;
  const std::string mode = field<std::string>(o, "mode", "day_window", "opdebias");
  if (mode == "day_window") {
    p.mode = ReforecastProtocol::Mode::kDayWindow;
  } else if (mode == "exact_month_day") {
    p.mode = ReforecastProtocol::Mode::kExactMonthDay;
  } else {
    throw ConfigError("opdebias.mode must be day_window or exact_month_day");
  }
  p.lookback_years = field(o, "lookback_years", p.lookback_years, "opdebias");
  p.day_window = field(o, "day_window", p.day_window, "opdebias");
  if (o.contains("hindcast")) {
    auto h = field<std::vector<int>>(o, "hindcast", {}, "opdebias");
    if (h.size() != 2) throw ConfigError("opdebias.hindcast must be [first_year, last_year]");
    p.hindcast = {h[0], h[1]};
  }
  const std::string era = field<std::string>(o, "era", "any", "opdebias");
  if (era == "any") {
    p.era = EraSelector::kAny;
  } else if (era == "reforecast") {
    p.era = EraSelector::kReforecast;
  } else if (era == "forecast") {
    p.era = EraSelector::kForecast;
  } else {
    throw ConfigError("opdebias.era must be any, reforecast or forecast");
  }
  p.issuance_count = field(o, "issuance_count", p.issuance_count, "opdebias");
  p.issuance_stride = field(o, "issuance_stride", p.issuance_stride, "opdebias");
  validate_protocol(p);
  return p;
}

json perpp_json(const PerppCoefficients& c, const Grid& grid) {
  json pts = json::array();
  for (size_t g = 0; g < grid.size(); ++g) {
    pts.push_back({{"lat", grid[g].lat},
                   {"lon", grid[g].lon},
                   {"beta", std::vector<double>(c.beta[g].begin(), c.beta[g].end())},
                   {"rows", c.rows[g]},
                   {"rank_deficient", c.rank_deficient[g] != 0}});
  }
  return {{"fitted_for", c.fitted_for.iso()},
          {"regressors", {"intercept", "climatology", "lag_obs_1", "lag_obs_2", "ensemble"}},
          {"points", pts}};
}

json month_day_key(int s) {
  const MonthDay md = MonthDay::FromNoleapIndex(s);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02u-%02u", md.month, md.day);
  return std::string(buf);
}

json loess_json(const LoessCorrection& c, const Grid& grid) {
  json pts = json::array();
  for (size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> so(365), sf(365), corr(365);
    for (size_t s = 0; s < 365; ++s) {
      so[s] = c.smoothed_obs[s * c.points + g];
      sf[s] = c.smoothed_forecast[s * c.points + g];
      corr[s] = c.correction[s * c.points + g];
    }
    pts.push_back({{"lat", grid[g].lat}, {"lon", grid[g].lon}, {"smoothed_obs", so},
                   {"smoothed_forecast", sf}, {"correction", corr}});
  }
  return {{"mode", c.mode == LoessMode::kAdditive ? "additive" : "multiplicative"},
          {"max_ratio", c.max_ratio},
          {"month_days", "365 entries from 01-01 to 12-31, Feb 29 excluded"},
          {"points", pts}};
}

json qm_json(const QuantileMapModel& m, const Grid& grid) {
  json pts = json::array();
  for (size_t g = 0; g < grid.size(); ++g) {
    json days = json::object();
    for (int s = 0; s < 365; ++s) {
      auto f = m.forecasts(s, g);
      auto o = m.observations(s, g);
      if (f.empty()) continue;
      days[month_day_key(s).get<std::string>()] = {
          {"forecasts", std::vector<double>(f.begin(), f.end())},
          {"observations", std::vector<double>(o.begin(), o.end())}};
    }
    pts.push_back({{"lat", grid[g].lat}, {"lon", grid[g].lon}, {"samples", days}});
  }
  return {{"rank_clip", {kQuantileRankLow, kQuantileRankHigh}}, {"points", pts}};
}

// ---------------------------------------------------------------------------
// explain inputs

struct ExplanatoryTable {
  std::vector<std::string> names;
  std::map<int64_t, std::vector<double>> rows;  // by date ordinal; NaN = missing
};

ExplanatoryTable load_explanatory(const std::string& path) {
  const std::string text = read_file(path);
  ExplanatoryTable t;
  size_t pos = 0, line_no = 0;
  bool header = true;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (header) {
      if (cells.empty() || cells[0] != "date" || cells.size() < 2) {
        throw ParseError(path, line_no, "expected header 'date,<var1>,...'");
      }
      for (size_t k = 1; k < cells.size(); ++k) t.names.emplace_back(cells[k]);
      header = false;
      continue;
    }
    if (cells.size() != t.names.size() + 1) {
      throw ParseError(path, line_no, "expected " + std::to_string(t.names.size() + 1) + " fields");
    }
    CalendarDate d;
    try {
      d = CalendarDate::Parse(cells[0]);
    } catch (const DomainError& e) {
      throw ParseError(path, line_no, e.what());
    }
    std::vector<double> v(t.names.size());
    for (size_t k = 0; k < v.size(); ++k) {
      if (cells[k + 1].empty()) {
        v[k] = std::nan("");
        continue;
      }
      try {
        v[k] = parse_double(cells[k + 1]);
      } catch (const DataError& e) {
        throw ParseError(path, line_no, e.what());
      }
    }
    if (!t.rows.emplace(d.ordinal(), std::move(v)).second) {
      throw ParseError(path, line_no, "duplicate date " + d.iso());
    }
  }
  if (header) throw ParseError(path, 1, "empty file");
  return t;
}

struct ManifestEntry {
  VariableKind kind;
  int lag_days;
};

std::map<std::string, ManifestEntry> load_manifest(const std::string& path) {
  json m;
  try {
    m = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON manifest: " + e.what());
  }
  if (!m.is_object()) throw ConfigError(path + ": manifest must map names to entries");
  std::map<std::string, ManifestEntry> out;
  for (const auto& [name, e] : m.items()) {
    check_keys(e, {"kind", "lag_days"}, "manifest entry");
    ManifestEntry me{parse_variable_kind(field<std::string>(e, "kind", "continuous", "manifest")),
                     field(e, "lag_days", 0, "manifest")};
    if (me.lag_days < 0) throw ConfigError("manifest lag_days must be >= 0 for '" + name + "'");
    out.emplace(name, me);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

RunResult cmd_generate(std::string_view config_json, const std::string& out_dir) {
  WarningCapture warnings;
  const Config cfg(config_json, {"scenario"});
  const json scen = cfg.has("scenario") ? cfg.raw()["scenario"] : json::object();
  const ScenarioConfig sc = parse_scenario(scen, cfg.seed());
  const Scenario s = generate_scenario(sc, cfg.jobs());

  Outputs out;
  out.add("obs.csv", render("obs.csv", [&](const std::string& p) { store_observations(s.obs, p); }));
  out.add("forecasts.csv",
          render("forecasts.csv", [&](const std::string& p) { store_forecasts(s.archive, p); }));
  out.add("truth_bias.csv", render("truth_bias.csv", [&](const std::string& p) {
            store_observations(s.truth_bias, p, "injected_bias");
          }));
  if (!s.explanatory.names.empty()) {
    const auto& ex = s.explanatory;
    std::string csv = "date";
    for (const auto& n : ex.names) csv += "," + n;
    csv += "\n";
    for (size_t t = 0; t < ex.dates.size(); ++t) {
      csv += ex.dates[t].iso();
      for (const auto& v : ex.values) csv += "," + format_double(v[t]);
      csv += "\n";
    }
    out.add("explanatory.csv", csv);
    json manifest = json::object();
    for (size_t k = 0; k < ex.names.size(); ++k) {
      manifest[ex.names[k]] = {{"kind", ex.categorical[k] ? "categorical" : "continuous"},
                               {"lag_days", 30}};
    }
    out.add("explanatory_manifest.json", manifest.dump(2) + "\n");
  }
  out.add("scenario.json", scenario_json(sc).dump(2) + "\n");
  RunResult r;
  r.files = out.commit(out_dir);
  r.warnings = warnings.take();
  return r;
}

RunResult cmd_correct(std::string_view config_json, const std::string& out_dir) {
  WarningCapture warnings;
  const Config cfg(config_json,
                   {"task", "model", "obs", "archive", "eval_start", "eval_end",
                    "climatology_base", "grids", "allow_custom_grid", "tuner_years",
                    "opdebias", "models", "probabilistic"});
  const TaskSpec task = cfg.task();
  const ModelKind model = parse_model(cfg.str("model"));
  const std::string obs_path = cfg.input("obs");
  const std::string archive_path = cfg.input("archive");
  std::vector<std::string> model_paths;
  if (cfg.has("models")) {
    const json& m = cfg.raw()["models"];
    if (!m.is_array()) throw ConfigError("config key 'models' must be an array of paths");
    for (const auto& p : m) {
      if (!p.is_string()) throw ConfigError("config key 'models' must be an array of paths");
      model_paths.push_back(cfg.resolve_input(p.get<std::string>(), "models"));
    }
  }
  const CalendarDate start = cfg.date("eval_start");
  const CalendarDate end = cfg.date("eval_end");
  if (end < start) throw ConfigError("eval_end precedes eval_start");
  const YearRange base = cfg.years("climatology_base");
  const bool custom = cfg.boolean("allow_custom_grid", false);

  PipelineInputs in;
  in.task = task;
  in.jobs = cfg.jobs();
  in.probabilistic = cfg.boolean("probabilistic", false);
  in.tuner_years = cfg.number("tuner_years", kTunerWindowYears);
  if (!(in.tuner_years > 0)) throw ConfigError("tuner_years must be > 0");
  if (cfg.has("grids")) {
    const json& g = cfg.raw()["grids"];
    check_keys(g, {"dynpp", "climpp"}, "grids");
    if (g.contains("dynpp")) in.dynpp_grid = parse_dynpp_grid(g["dynpp"], task, custom);
    if (g.contains("climpp")) in.climpp_grid = parse_climpp_grid(g["climpp"], task, custom);
  }
  in.opdebias.era = EraSelector::kAny;
  if (cfg.has("opdebias")) in.opdebias = parse_protocol(cfg.raw()["opdebias"]);

  const FieldSeries obs = load_observations(obs_path);
  const ForecastArchive archive = load_forecasts(archive_path, &obs.grid());
  std::vector<ForecastArchive> extra;
  for (const auto& p : model_paths) extra.push_back(load_forecasts(p, &obs.grid()));
  const Climatology clim = build_climatology(obs, base);
  in.obs = &obs;
  in.archive = &archive;
  in.clim = &clim;
  for (const auto& a : extra) in.models.push_back(&a);

  const auto targets = eval_dates(in, model, start, end);
  if (targets.empty()) {
    throw DataError("no raw forecasts for targets between " + start.iso() + " and " + end.iso());
  }
  CorrectionRun run = run_correction(in, model, targets);
  if (run.forecasts.empty()) throw DataError(std::string(model_name(model)) + " produced no forecasts");

  Outputs out;
  const ForecastArchive det = deterministic_archive(run.forecasts, task);
  out.add("forecasts.csv", render("forecasts.csv", [&](const std::string& p) { store_forecasts(det, p); }));
  if (in.probabilistic) {
    const ForecastArchive ens = ensemble_archive(run.forecasts, task, run.ensembles);
    out.add("ensemble.csv", render("ensemble.csv", [&](const std::string& p) { store_forecasts(ens, p); }));
  }
  json tuning = json::array();
  for (const auto& e : run.tuning) {
    tuning.push_back({{"target", e.target.iso()},
                      {"component", e.component},
                      {"config", e.config},
                      {"fallback", e.fallback},
                      {"mean_rmse", num_json(e.mean_rmse)},
                      {"scored_dates", e.scored_dates}});
  }
  json fitted = json::object();
  if (run.perpp_last) fitted["perpp"] = perpp_json(*run.perpp_last, obs.grid());
  if (run.loess) fitted["loess"] = loess_json(*run.loess, obs.grid());
  if (run.qm) fitted["qm"] = qm_json(*run.qm, obs.grid());
  json dyn_grid = json::array(), clim_grid = json::array();
  for (const auto& c : in.dynpp_grid.empty() ? dynpp_candidates(task) : in.dynpp_grid) {
    dyn_grid.push_back(c.label());
  }
  for (const auto& c : in.climpp_grid.empty() ? climpp_candidates(task) : in.climpp_grid) {
    clim_grid.push_back(c.label());
  }
  json m = {{"model", model_name(model)},
            {"task", task.name()},
            {"eval_start", start.iso()},
            {"eval_end", end.iso()},
            {"climatology_base", {base.first, base.last}},
            {"targets", run.forecasts.num_dates()},
            {"candidates", {{"dynpp", dyn_grid}, {"climpp", clim_grid}}},
            {"tuner_years", in.tuner_years},
            {"fitted", fitted},
            {"tuning", tuning},
            {"warnings", run.warnings}};
  out.add("model.json", m.dump(2) + "\n");
  RunResult r;
  r.files = out.commit(out_dir);
  r.warnings = warnings.take();
  return r;
}

RunResult cmd_evaluate(std::string_view config_json, const std::string& out_dir) {
  WarningCapture warnings;
  const Config cfg(config_json,
                   {"task", "obs", "forecasts", "ensemble", "climatology_base", "tercile_base",
                    "thresholds", "bootstrap_resamples", "ci_level", "metrics"});
  const TaskSpec task = cfg.task();
  const std::string obs_path = cfg.input("obs");
  const std::string fc_path = cfg.input("forecasts");
  const std::optional<std::string> ens_path =
      cfg.has("ensemble") ? std::optional<std::string>(cfg.input("ensemble")) : std::nullopt;
  const YearRange base = cfg.years("climatology_base");
  const YearRange tercile_base = cfg.has("tercile_base") ? cfg.years("tercile_base") : base;
  const int resamples = static_cast<int>(cfg.integer("bootstrap_resamples", 1000));
  if (resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
  const double level = cfg.number("ci_level", 0.95);
  if (!(level > 0 && level < 1)) throw ConfigError("ci_level must be in (0, 1)");
  std::vector<double> thresholds;
  if (cfg.has("thresholds")) {
    try {
      thresholds = cfg.raw()["thresholds"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ConfigError("thresholds must be an array of numbers");
    }
  } else {
    for (int k = -20; k <= 20; ++k) thresholds.push_back(k / 20.0);
  }
  std::set<std::string> metrics = {"skill", "spatial", "bias", "fraction", "crps", "bss"};
  if (cfg.has("metrics")) {
    std::set<std::string> chosen;
    for (const auto& m : cfg.raw()["metrics"]) {
      if (!m.is_string() || !metrics.count(m.get<std::string>())) {
        throw ConfigError("metrics entries must be among skill, spatial, bias, fraction, crps, bss");
      }
      chosen.insert(m.get<std::string>());
    }
    metrics = chosen;
  }
  (void)task;

  const FieldSeries obs = load_observations(obs_path);
  const ForecastArchive fa = load_forecasts(fc_path, &obs.grid());
  const FieldSeries fc = deterministic_series(fa, fc_path);
  const Climatology clim = build_climatology(obs, base);
  const uint64_t seed = cfg.seed();
  Outputs out;
  json summary = {{"forecasts", fc.num_dates()}};

  const auto skills = per_date_skill(fc, obs, clim);
  if (metrics.count("skill")) {
    std::string csv = "date,skill\n";
    for (size_t r = 0; r < fc.num_dates(); ++r) {
      csv += fc.date(r).iso() + "," + (skills[r] ? format_double(*skills[r]) : "") + "\n";
    }
    out.add("skill.csv", csv);
    const SkillSummary s =
        mean_skill(std::vector<CalendarDate>(fc.dates().begin(), fc.dates().end()), skills,
                   level, resamples, derive_seed(seed, "skill"));
    json seasons = json::object();
    for (int k = 0; k < 4; ++k) {
      seasons[std::string(season_name(static_cast<Season>(k)))] = {
          {"mean", s.season_mean[k] ? json(*s.season_mean[k]) : json(nullptr)},
          {"dates", s.season_count[k]}};
    }
    summary["skill"] = {{"mean", s.mean},
                        {"defined", s.defined},
                        {"undefined", fc.num_dates() - s.defined},
                        {"ci", {{"lo", s.ci->lo}, {"hi", s.ci->hi}, {"level", s.ci->level}}},
                        {"seasons", seasons}};
  }
  std::vector<std::optional<double>> spatial;
  if (metrics.count("spatial") || metrics.count("fraction")) spatial = spatial_skill(fc, obs, clim);
  if (metrics.count("spatial")) {
    std::vector<double> v(spatial.size());
    for (size_t g = 0; g < v.size(); ++g) v[g] = spatial[g] ? *spatial[g] : std::nan("");
    out.add("spatial_skill.csv", spatial_csv(obs.grid(), v));
  }
  if (metrics.count("fraction")) {
    std::string csv = "threshold,fraction\n";
    for (const auto& [t, f] : fraction_above_curve(spatial, thresholds)) {
      csv += format_double(t) + "," + format_double(f) + "\n";
    }
    out.add("fraction_above.csv", csv);
  }
  if (metrics.count("bias")) {
    const auto b = bias_map(fc, obs);
    out.add("bias.csv", spatial_csv(obs.grid(), b));
    double acc = 0;
    size_t n = 0;
    for (double v : b) {
      if (std::isfinite(v)) {
        acc += v;
        ++n;
      }
    }
    summary["bias"] = {{"mean", n ? json(acc / n) : json(nullptr)}};
  }
  const bool want_prob = metrics.count("crps") || metrics.count("bss");
  if (ens_path && want_prob) {
    const ForecastArchive ea = load_forecasts(*ens_path, &obs.grid());
    const TercileThresholds terciles = TercileThresholds::Build(obs, tercile_base);
    std::map<int64_t, std::vector<EmpiricalDistribution>> dists;
    std::set<std::pair<int64_t, int>> groups;
    for (size_t i = 0; i < ea.size(); ++i) {
      const auto& k = ea.entry(i).key;
      if (k.member >= 0) groups.insert({k.issuance.ordinal(), k.lead});
    }
    const size_t G = obs.num_points();
    for (const auto& [iss, lead] : groups) {
      const CalendarDate issuance = CalendarDate::FromOrdinal(iss);
      const auto members = ea.members(issuance, lead);
      std::vector<EmpiricalDistribution> d;
      for (size_t g = 0; g < G; ++g) {
        std::vector<double> v;
        for (const auto& m : members) v.push_back(m[g]);
        d.emplace_back(std::move(v));
      }
      if (!dists.emplace((issuance + lead).ordinal(), std::move(d)).second) {
        throw DataError(*ens_path + ": more than one ensemble for target " + (issuance + lead).iso());
      }
    }
    std::string csv = "date,crps,bss\n";
    double crps_sum = 0, bss_sum = 0;
    size_t n = 0;
    for (const auto& [t, d] : dists) {
      const CalendarDate date = CalendarDate::FromOrdinal(t);
      auto y = obs.complete_row(date);
      if (!y) continue;
      double c = 0;
      for (size_t g = 0; g < G; ++g) c += crps(d[g], (*y)[g]);
      c /= static_cast<double>(G);
      const double b = brier_skill_score(d, *y, terciles.at(date));
      csv += date.iso() + "," + (metrics.count("crps") ? format_double(c) : "") + "," +
             (metrics.count("bss") ? num(b) : "") + "\n";
      crps_sum += c;
      bss_sum += b;
      ++n;
    }
    if (n == 0) throw DataError("no ensemble target date has observations");
    out.add("probabilistic.csv", csv);
    json p = {{"dates", n}};
    if (metrics.count("crps")) p["mean_crps"] = crps_sum / n;
    if (metrics.count("bss")) p["mean_bss"] = num_json(bss_sum / n);
    summary["probabilistic"] = p;
  }
  out.add("summary.json", summary.dump(2) + "\n");
  RunResult r;
  r.files = out.commit(out_dir);
  r.warnings = warnings.take();
  return r;
}

RunResult cmd_explain(std::string_view config_json, const std::string& out_dir) {
  WarningCapture warnings;
  const Config cfg(config_json,
                   {"task", "obs", "abc", "baseline", "explanatory", "manifest",
                    "climatology_base", "train_end", "bootstrap_resamples", "ci_level",
                    "variables"});
  const std::string obs_path = cfg.input("obs");
  const std::string abc_path = cfg.input("abc");
  const std::string base_path = cfg.input("baseline");
  const std::string ex_path = cfg.input("explanatory");
  const std::string man_path = cfg.input("manifest");
  const YearRange base = cfg.years("climatology_base");
  const std::optional<CalendarDate> train_end =
      cfg.has("train_end") ? std::optional<CalendarDate>(cfg.date("train_end")) : std::nullopt;
  const int resamples = static_cast<int>(cfg.integer("bootstrap_resamples", 1000));
  if (resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
  const double level = cfg.number("ci_level", 0.95);
  if (!(level > 0 && level < 1)) throw ConfigError("ci_level must be in (0, 1)");
  const auto manifest = load_manifest(man_path);
  std::vector<std::string> wanted;
  if (cfg.has("variables")) {
    try {
      wanted = cfg.raw()["variables"].get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw ConfigError("variables must be an array of names");
    }
  }

  const FieldSeries obs = load_observations(obs_path);
  const FieldSeries abc = deterministic_series(load_forecasts(abc_path, &obs.grid()), abc_path);
  const FieldSeries bl = deterministic_series(load_forecasts(base_path, &obs.grid()), base_path);
  const Climatology clim = build_climatology(obs, base);
  const ExplanatoryTable ex = load_explanatory(ex_path);
  if (wanted.empty()) wanted = ex.names;
  std::vector<size_t> cols;
  for (const auto& w : wanted) {
    auto it = std::find(ex.names.begin(), ex.names.end(), w);
    if (it == ex.names.end()) throw ConfigError("explanatory variable '" + w + "' not in " + ex_path);
    if (!manifest.count(w)) throw ConfigError("explanatory variable '" + w + "' missing from manifest");
    cols.push_back(static_cast<size_t>(it - ex.names.begin()));
  }

  // Steps 1-2: per-date skills of both streams and lagged explanatory values.
  const auto sa = per_date_skill(abc, obs, clim);
  const auto sb = per_date_skill(bl, obs, clim);
  std::map<int64_t, double> skill_b;
  for (size_t r = 0; r < bl.num_dates(); ++r) {
    if (sb[r]) skill_b[bl.date(r).ordinal()] = *sb[r];
  }
  std::vector<CalendarDate> dates;
  std::vector<double> abc_skill, base_skill;
  std::vector<std::vector<double>> values(cols.size());
  for (size_t r = 0; r < abc.num_dates(); ++r) {
    if (!sa[r]) continue;
    const CalendarDate d = abc.date(r);
    auto b = skill_b.find(d.ordinal());
    if (b == skill_b.end()) continue;
    std::vector<double> v(cols.size());
    bool ok = true;
    for (size_t k = 0; k < cols.size() && ok; ++k) {
      const int lag = manifest.at(wanted[k]).lag_days;
      auto row = ex.rows.find((d - lag).ordinal());
      ok = row != ex.rows.end() && std::isfinite(row->second[cols[k]]);
      if (ok) v[k] = row->second[cols[k]];
    }
    if (!ok) continue;
    dates.push_back(d);
    abc_skill.push_back(*sa[r]);
    base_skill.push_back(b->second);
    for (size_t k = 0; k < cols.size(); ++k) values[k].push_back(v[k]);
  }
  size_t n_train = dates.size();
  if (train_end) {
    n_train = std::upper_bound(dates.begin(), dates.end(), *train_end) - dates.begin();
  }
  if (n_train < static_cast<size_t>(kDecileBins)) {
    throw DataError("explain: " + std::to_string(n_train) +
                    " training forecasts with both skills and explanatory values (need 10)");
  }

  // Step 3: bins from the training sample, applied to every date.
  std::vector<Binning> binnings;
  ExplanationTable table;
  table.dates.assign(dates.begin(), dates.begin() + n_train);
  for (size_t i = 0; i < n_train; ++i) table.outcome.push_back(abc_skill[i] - base_skill[i]);
  std::vector<std::vector<int>> all_bins;
  for (size_t k = 0; k < cols.size(); ++k) {
    const VariableKind kind = manifest.at(wanted[k]).kind;
    const std::span<const double> train(values[k].data(), n_train);
    binnings.push_back(Binning::Fit(train, kind));
    all_bins.push_back(binnings.back().assign(values[k]));
    ExplanatoryVariable v{wanted[k], kind, std::vector<double>(train.begin(), train.end()),
                          std::vector<int>(all_bins.back().begin(), all_bins.back().begin() + n_train),
                          binnings.back().num_bins()};
    table.variables.push_back(std::move(v));
  }

  // Steps 4-6.
  const uint64_t seed = cfg.seed();
  const ShapleyResult sh = cohort_shapley(table, cfg.jobs());
  const ShapleyEffects eff = shapley_effects(sh);
  const ImpactSummary imp =
      impact_probabilities(sh, table, level, resamples, derive_seed(seed, "impact"));

  // Steps 7-8.
  const std::vector<int> counts = high_impact_counts(imp, all_bins);
  const int V = static_cast<int>(cols.size());
  const KStarResult ks =
      choose_k_star(std::span<const double>(abc_skill.data(), n_train),
                    std::span<const double>(base_skill.data(), n_train),
                    std::span<const int>(counts.data(), n_train), V + 1);
  const std::vector<bool> choice = opportunistic_select(counts, ks.k_star);

  json vars = json::array();
  for (size_t k = 0; k < cols.size(); ++k) {
    json bins = json::array();
    for (const auto& b : imp.bins[k]) {
      json range = nullptr;
      if (binnings[k].kind() == VariableKind::kContinuous) {
        auto e = binnings[k].edges();
        range = {b.bin > 0 ? json(e[b.bin - 1]) : json(nullptr),
                 b.bin < static_cast<int>(e.size()) ? json(e[b.bin]) : json(nullptr)};
      } else {
        range = binnings[k].categories()[b.bin];
      }
      bins.push_back({{"bin", b.bin},
                      {"range", range},
                      {"count", b.count},
                      {"probability", b.probability},
                      {"ci", {b.ci.lo, b.ci.hi}},
                      {"flag", impact_flag_name(b.flag)}});
    }
    const auto most = most_impacted_forecast(sh, table, imp, k);
    vars.push_back({{"name", wanted[k]},
                    {"kind", variable_kind_name(table.variables[k].kind)},
                    {"lag_days", manifest.at(wanted[k]).lag_days},
                    {"effect", eff.raw[k]},
                    {"effect_normalized", eff.normalized[k]},
                    {"bins", bins},
                    {"most_impacted", most ? json({{"date", table.dates[*most].iso()},
                                                   {"phi", sh.phi[*most][k]}})
                                           : json(nullptr)}});
  }
  auto blend_mean = [&](size_t b, size_t e) {
    double acc = 0;
    for (size_t i = b; i < e; ++i) acc += choice[i] ? abc_skill[i] : base_skill[i];
    return e > b ? json(acc / static_cast<double>(e - b)) : json(nullptr);
  };
  auto mean_of = [](const std::vector<double>& v, size_t b, size_t e) {
    double acc = 0;
    for (size_t i = b; i < e; ++i) acc += v[i];
    return e > b ? json(acc / static_cast<double>(e - b)) : json(nullptr);
  };
  json result = {
      {"subjects", n_train},
      {"holdout_subjects", dates.size() - n_train},
      {"train_end", train_end ? json(train_end->iso()) : json(nullptr)},
      {"grand_mean_outcome", sh.grand_mean},
      {"variables", vars},
      {"k_star", ks.k_star},
      {"k_curve", ks.mean_skill},
      {"train", {{"abc", mean_of(abc_skill, 0, n_train)},
                 {"baseline", mean_of(base_skill, 0, n_train)},
                 {"opportunistic", blend_mean(0, n_train)}}},
      {"holdout", {{"abc", mean_of(abc_skill, n_train, dates.size())},
                   {"baseline", mean_of(base_skill, n_train, dates.size())},
                   {"opportunistic", blend_mean(n_train, dates.size())}}}};

  std::string shap = "date,outcome";
  for (const auto& w : wanted) shap += "," + w;
  shap += "\n";
  for (size_t i = 0; i < n_train; ++i) {
    shap += table.dates[i].iso() + "," + format_double(table.outcome[i]);
    for (size_t k = 0; k < cols.size(); ++k) shap += "," + format_double(sh.phi[i][k]);
    shap += "\n";
  }
  std::string opp = "date,split,high_count,choice,abc_skill,baseline_skill,opportunistic_skill\n";
  for (size_t i = 0; i < dates.size(); ++i) {
    opp += dates[i].iso() + "," + (i < n_train ? "train" : "holdout") + "," +
           std::to_string(counts[i]) + "," + (choice[i] ? "abc" : "baseline") + "," +
           format_double(abc_skill[i]) + "," + format_double(base_skill[i]) + "," +
           format_double(choice[i] ? abc_skill[i] : base_skill[i]) + "\n";
  }
  Outputs out;
  out.add("explain.json", result.dump(2) + "\n");
  out.add("shapley.csv", shap);
  out.add("opportunistic.csv", opp);
  RunResult r;
  r.files = out.commit(out_dir);
  r.warnings = warnings.take();
  return r;
}

}  // namespace subseas::app
