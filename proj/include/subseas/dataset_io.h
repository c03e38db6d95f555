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

#ifndef SUBSEAS_DATASET_IO_H_
#define SUBSEAS_DATASET_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "subseas/field.h"

namespace subseas {

// Observation CSV: `date,lat,lon,value`, one row per cell. An empty value
// field marks a missing cell. Grid order follows first appearance unless a
// reference grid is given, in which case every point must belong to it.
FieldSeries load_observations(const std::string& path,
                              const Grid* reference = nullptr,
                              std::string_view value_column = "value");
void store_observations(const FieldSeries& series, const std::string& path,
                        std::string_view value_column = "value");

// Forecast CSV:
// `issuance_date,target_date,lead_days,member,lat,lon,value,era`.
ForecastArchive load_forecasts(const std::string& path,
                               const Grid* reference = nullptr);
void store_forecasts(const ForecastArchive& archive, const std::string& path);

// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);  // throws DataError

// Writes `content` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace subseas

#endif  // SUBSEAS_DATASET_IO_H_
