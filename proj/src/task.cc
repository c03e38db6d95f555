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

#include "subseas/task.h"

#include "subseas/error.h"

namespace subseas {

TaskSpec TaskSpec::Make(Variable v, Horizon h) {
  TaskSpec t;
  t.variable = v;
  t.horizon = h;
  switch (h) {
    case Horizon::kWeeks12: t.lead = 1; break;
    case Horizon::kWeeks34: t.lead = 15; break;
    case Horizon::kWeeks56: t.lead = 29; break;
  }
  t.period = kPeriodLength;
  return t;
}

TaskSpec TaskSpec::Parse(std::string_view name) {
  const size_t sep = name.find_first_of("_-");
  if (sep == std::string_view::npos) {
    throw ConfigError("task must look like tmp2m_34w, got '" +
                      std::string(name) + "'");
  }
  const std::string_view var = name.substr(0, sep);
  const std::string_view hor = name.substr(sep + 1);
  Variable v;
  if (var == "tmp2m") {
    v = Variable::kTemperature;
  } else if (var == "precip") {
    v = Variable::kPrecipitation;
  } else {
    throw ConfigError("unknown task variable '" + std::string(var) + "'");
  }
  Horizon h;
  if (hor == "12w") {
    h = Horizon::kWeeks12;
  } else if (hor == "34w") {
    h = Horizon::kWeeks34;
  } else if (hor == "56w") {
    h = Horizon::kWeeks56;
  } else {
    throw ConfigError("unknown task horizon '" + std::string(hor) + "'");
  }
  return Make(v, h);
}

std::string TaskSpec::name() const {
  return std::string(variable_name(variable)) + "_" +
         std::string(horizon_name(horizon));
}

std::string_view variable_name(Variable v) {
  return v == Variable::kTemperature ? "tmp2m" : "precip";
}

std::string_view horizon_name(Horizon h) {
  switch (h) {
    case Horizon::kWeeks12: return "12w";
    case Horizon::kWeeks34: return "34w";
    case Horizon::kWeeks56: return "56w";
  }
  return "?";
}

}  // namespace subseas
