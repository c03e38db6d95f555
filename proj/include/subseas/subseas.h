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

#ifndef SUBSEAS_SUBSEAS_H_
#define SUBSEAS_SUBSEAS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SUBSEAS_BUILDING_DLL)
#define SSF_API __attribute__((visibility("default")))
#else
#define SSF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssf_status {
  SSF_OK = 0,
  SSF_ERR_USAGE = 1,    // bad argument (null handle, out-of-range index)
  SSF_ERR_CONFIG = 2,   // invalid run configuration or missing input
  SSF_ERR_DOMAIN = 3,
  SSF_ERR_DATA = 4,     // malformed or inconsistent input data
  SSF_ERR_LEAKAGE = 5,
  SSF_ERR_IO = 6,
  SSF_ERR_INTERNAL = 7,
  SSF_UNDEFINED = 8,    // value is mathematically undefined (e.g. zero anomaly)
} ssf_status;

typedef struct ssf_field ssf_field;      // observation series
typedef struct ssf_archive ssf_archive;  // forecast archive

// Message for the last non-OK status on the calling thread; never null.
SSF_API const char* ssf_last_error(void);
SSF_API const char* ssf_version(void);

// Process exit code for a status: 0 ok, 2 usage/config, 1 anything else.
SSF_API int ssf_exit_code(ssf_status status);

// Warnings and info messages; pass NULL to restore the stderr default.
// level: 0 info, 1 warning.
typedef void (*ssf_log_fn)(int level, const char* message, void* user);
SSF_API void ssf_set_log_callback(ssf_log_fn fn, void* user);

SSF_API ssf_status ssf_field_load(const char* path, ssf_field** out);
SSF_API ssf_status ssf_field_store(const ssf_field* f, const char* path);
SSF_API void ssf_field_free(ssf_field* f);
SSF_API size_t ssf_field_num_dates(const ssf_field* f);
SSF_API size_t ssf_field_num_points(const ssf_field* f);
// Days since 1970-01-01.
SSF_API ssf_status ssf_field_date(const ssf_field* f, size_t row, int64_t* ordinal);
// NaN for a missing cell.
SSF_API ssf_status ssf_field_value(const ssf_field* f, size_t row, size_t point, double* value);

SSF_API ssf_status ssf_archive_load(const char* path, const ssf_field* grid_from,
                                    ssf_archive** out);
SSF_API ssf_status ssf_archive_store(const ssf_archive* a, const char* path);
SSF_API void ssf_archive_free(ssf_archive* a);
SSF_API size_t ssf_archive_size(const ssf_archive* a);

// Uncentered anomaly correlation of n-vectors.
SSF_API ssf_status ssf_skill(const double* yhat, const double* y, const double* clim,
                             size_t n, double* out);
SSF_API ssf_status ssf_crps(const double* members, size_t n, double y, double* out);
SSF_API double ssf_day_diff(int64_t t_star, int64_t t);

// Batch commands; config_json is a JSON document, outputs go to out_dir.
SSF_API ssf_status ssf_run_generate(const char* config_json, const char* out_dir);
SSF_API ssf_status ssf_run_correct(const char* config_json, const char* out_dir);
SSF_API ssf_status ssf_run_evaluate(const char* config_json, const char* out_dir);
SSF_API ssf_status ssf_run_explain(const char* config_json, const char* out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // SUBSEAS_SUBSEAS_H_
