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

#include "subseas/subseas.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <new>
#include <string>

#include "subseas/app.h"
#include "subseas/calendar.h"
#include "subseas/dataset_io.h"
#include "subseas/error.h"
#include "subseas/field.h"
#include "subseas/log.h"
#include "subseas/metrics.h"

struct ssf_field {
  subseas::FieldSeries series;
};

struct ssf_archive {
  subseas::ForecastArchive archive;
};

namespace {

thread_local std::string g_last_error;

ssf_status fail(ssf_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs `fn`, translating exceptions to status codes.
template <typename Fn>
ssf_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const subseas::ConfigError& e) {
    return fail(SSF_ERR_CONFIG, e.what());
  } catch (const subseas::LeakageError& e) {
    return fail(SSF_ERR_LEAKAGE, e.what());
  } catch (const subseas::DataError& e) {
    return fail(SSF_ERR_DATA, e.what());
  } catch (const subseas::DomainError& e) {
    return fail(SSF_ERR_DOMAIN, e.what());
  } catch (const subseas::IoError& e) {
    return fail(SSF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SSF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SSF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SSF_ERR_INTERNAL, "unknown error");
  }
}

ssf_status run(subseas::app::RunResult (*cmd)(std::string_view, const std::string&),
               const char* config_json, const char* out_dir) {
  if (!config_json || !out_dir) return fail(SSF_ERR_USAGE, "null argument");
  return guarded([&] {
    cmd(config_json, out_dir);
    return SSF_OK;
  });
}

}  // namespace

extern "C" {

const char* ssf_last_error(void) { return g_last_error.c_str(); }

const char* ssf_version(void) { return "0.1.0"; }

int ssf_exit_code(ssf_status status) {
  switch (status) {
    case SSF_OK:
      return 0;
    case SSF_ERR_USAGE:
    case SSF_ERR_CONFIG:
      return 2;
    default:
      return 1;
  }
}

void ssf_set_log_callback(ssf_log_fn fn, void* user) {
  if (!fn) {
    subseas::log::set_sink([](subseas::log::Level level, std::string_view msg) {
      std::fprintf(stderr, "%s: %.*s\n", level == subseas::log::Level::kWarning ? "warning" : "info",
                   static_cast<int>(msg.size()), msg.data());
    });
    return;
  }
  subseas::log::set_sink([fn, user](subseas::log::Level level, std::string_view msg) {
    const std::string s(msg);
    fn(static_cast<int>(level), s.c_str(), user);
  });
}

ssf_status ssf_field_load(const char* path, ssf_field** out) {
  if (!path || !out) return fail(SSF_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new ssf_field{subseas::load_observations(path)};
    return SSF_OK;
  });
}

ssf_status ssf_field_store(const ssf_field* f, const char* path) {
  if (!f || !path) return fail(SSF_ERR_USAGE, "null argument");
  return guarded([&] {
    subseas::store_observations(f->series, path);
    return SSF_OK;
  });
}

void ssf_field_free(ssf_field* f) { delete f; }

size_t ssf_field_num_dates(const ssf_field* f) { return f ? f->series.num_dates() : 0; }

size_t ssf_field_num_points(const ssf_field* f) { return f ? f->series.num_points() : 0; }

ssf_status ssf_field_date(const ssf_field* f, size_t row, int64_t* ordinal) {
  if (!f || !ordinal) return fail(SSF_ERR_USAGE, "null argument");
  if (row >= f->series.num_dates()) return fail(SSF_ERR_USAGE, "row out of range");
  *ordinal = f->series.date(row).ordinal();
  return SSF_OK;
}

ssf_status ssf_field_value(const ssf_field* f, size_t row, size_t point, double* value) {
  if (!f || !value) return fail(SSF_ERR_USAGE, "null argument");
  if (row >= f->series.num_dates() || point >= f->series.num_points()) {
    return fail(SSF_ERR_USAGE, "index out of range");
  }
  *value = f->series.present(row, point) ? f->series.at(row, point) : std::nan("");
  return SSF_OK;
}

ssf_status ssf_archive_load(const char* path, const ssf_field* grid_from, ssf_archive** out) {
  if (!path || !out) return fail(SSF_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    const subseas::Grid* ref = grid_from ? &grid_from->series.grid() : nullptr;
    *out = new ssf_archive{subseas::load_forecasts(path, ref)};
    return SSF_OK;
  });
}

ssf_status ssf_archive_store(const ssf_archive* a, const char* path) {
  if (!a || !path) return fail(SSF_ERR_USAGE, "null argument");
  return guarded([&] {
    subseas::store_forecasts(a->archive, path);
    return SSF_OK;
  });
}

void ssf_archive_free(ssf_archive* a) { delete a; }

size_t ssf_archive_size(const ssf_archive* a) { return a ? a->archive.size() : 0; }

ssf_status ssf_skill(const double* yhat, const double* y, const double* clim, size_t n,
                     double* out) {
  if (!yhat || !y || !clim || !out) return fail(SSF_ERR_USAGE, "null argument");
  return guarded([&] {
    auto s = subseas::skill({yhat, n}, {y, n}, {clim, n});
    if (!s) {
      *out = std::nan("");
      return fail(SSF_UNDEFINED, "skill undefined: zero anomaly vector");
    }
    *out = *s;
    return SSF_OK;
  });
}

ssf_status ssf_crps(const double* members, size_t n, double y, double* out) {
  if (!members || !out) return fail(SSF_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = subseas::crps(subseas::EmpiricalDistribution({members, members + n}), y);
    return SSF_OK;
  });
}

double ssf_day_diff(int64_t t_star, int64_t t) {
  return subseas::day_diff(subseas::CalendarDate::FromOrdinal(t_star),
                           subseas::CalendarDate::FromOrdinal(t));
}

ssf_status ssf_run_generate(const char* config_json, const char* out_dir) {
  return run(&subseas::app::cmd_generate, config_json, out_dir);
}

ssf_status ssf_run_correct(const char* config_json, const char* out_dir) {
  return run(&subseas::app::cmd_correct, config_json, out_dir);
}

ssf_status ssf_run_evaluate(const char* config_json, const char* out_dir) {
  return run(&subseas::app::cmd_evaluate, config_json, out_dir);
}

ssf_status ssf_run_explain(const char* config_json, const char* out_dir) {
  return run(&subseas::app::cmd_explain, config_json, out_dir);
}

}  // extern "C"
