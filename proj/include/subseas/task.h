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

#ifndef SUBSEAS_TASK_H_
#define SUBSEAS_TASK_H_

#include <string>
#include <string_view>

namespace subseas {

enum class Variable { kTemperature, kPrecipitation };
enum class Horizon { kWeeks12, kWeeks34, kWeeks56 };

inline constexpr int kPeriodLength = 14;  // L, days

// Forecasting task: target variable and horizon with lead l* and period L.
struct TaskSpec {
  Variable variable = Variable::kTemperature;
  Horizon horizon = Horizon::kWeeks34;
  int lead = 15;                  // l*
  int period = kPeriodLength;     // L

  static TaskSpec Make(Variable v, Horizon h);
  // "tmp2m_34w", "precip_56w", ... ('-' accepted as separator).
  static TaskSpec Parse(std::string_view name);
  std::string name() const;

  // Largest training date observable one day before issuance:
  // t* - l* - L - 1 expressed as an offset from t*.
  int training_gap() const { return lead + period + 1; }
};

std::string_view variable_name(Variable v);
std::string_view horizon_name(Horizon h);

}  // namespace subseas

#endif  // SUBSEAS_TASK_H_
