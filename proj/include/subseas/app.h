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

#ifndef SUBSEAS_APP_H_
#define SUBSEAS_APP_H_

#include <string>
#include <string_view>
#include <vector>

namespace subseas::app {

// Batch commands driven by one JSON run configuration. Relative paths resolve
// against the config field "base_dir" (default: working directory). Inputs
// are validated before anything is written; outputs land in `out_dir` via
// temp file + rename. ConfigError signals a usage problem, other Error
// subclasses a runtime failure.
struct RunResult {
  std::vector<std::string> files;  // written, relative to out_dir
  std::vector<std::string> warnings;
};

RunResult cmd_generate(std::string_view config_json, const std::string& out_dir);
RunResult cmd_correct(std::string_view config_json, const std::string& out_dir);
RunResult cmd_evaluate(std::string_view config_json, const std::string& out_dir);
RunResult cmd_explain(std::string_view config_json, const std::string& out_dir);

}  // namespace subseas::app

#endif  // SUBSEAS_APP_H_
