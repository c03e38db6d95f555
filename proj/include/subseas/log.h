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

#ifndef SUBSEAS_LOG_H_
#define SUBSEAS_LOG_H_

#include <functional>
#include <string_view>

namespace subseas::log {

enum class Level { kInfo = 0, kWarning = 1 };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink (default: warnings to stderr). Returns the
// previous sink.
Sink set_sink(Sink sink);

void info(std::string_view msg);
void warn(std::string_view msg);

}  // namespace subseas::log

#endif  // SUBSEAS_LOG_H_
