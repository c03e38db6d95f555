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

#include "subseas/log.h"

#include <iostream>
#include <mutex>

namespace subseas::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](Level level, std::string_view msg) {
    if (level == Level::kWarning) std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

void emit(Level level, std::string_view msg) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink()) current_sink()(level, msg);
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  Sink prev = std::move(current_sink());
  current_sink() = std::move(sink);
  return prev;
}

void info(std::string_view msg) { emit(Level::kInfo, msg); }
void warn(std::string_view msg) { emit(Level::kWarning, msg); }

}  // namespace subseas::log
