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

#ifndef SUBSEAS_OBSERVABLE_H_
#define SUBSEAS_OBSERVABLE_H_

#include <atomic>
#include <cstdint>
#include <limits>

#include "subseas/calendar.h"
#include "subseas/task.h"

namespace subseas {

// What is observable when issuing a forecast for target t*: observations
// dated t <= t* - l* - L - 1 and forecasts issued on or before t* - l*.
struct AccessHorizon {
  CalendarDate target;
  CalendarDate obs_cutoff;
  CalendarDate issuance_cutoff;

  static AccessHorizon For(const TaskSpec& task, CalendarDate target) {
    return {target, target - task.training_gap(), target - task.lead};
  }
};

// Counts every guarded read. Excess is measured in days past the cutoff; a
// clean run keeps both maxima <= 0 and violations at zero.
class AccessAudit {
 public:
  void record_obs(int64_t excess_days);
  void record_forecast(int64_t excess_days);

  uint64_t obs_reads() const { return obs_reads_.load(); }
  uint64_t forecast_reads() const { return forecast_reads_.load(); }
  uint64_t violations() const { return violations_.load(); }
  int64_t max_obs_excess() const { return max_obs_excess_.load(); }
  int64_t max_forecast_excess() const { return max_forecast_excess_.load(); }

 private:
  static void raise_max(std::atomic<int64_t>& slot, int64_t v);

  std::atomic<uint64_t> obs_reads_{0};
  std::atomic<uint64_t> forecast_reads_{0};
  std::atomic<uint64_t> violations_{0};
  std::atomic<int64_t> max_obs_excess_{std::numeric_limits<int64_t>::min()};
  std::atomic<int64_t> max_forecast_excess_{std::numeric_limits<int64_t>::min()};
};

// Enforces the horizon on every data read made by a corrector. Reads past the
// cutoff are recorded and raise LeakageError.
class DataGuard {
 public:
  explicit DataGuard(AccessHorizon h, AccessAudit* audit = nullptr)
      : horizon_(h), audit_(audit) {}

  const AccessHorizon& horizon() const { return horizon_; }
  AccessAudit* audit() const { return audit_; }

  void obs(CalendarDate t) const;
  void forecast(CalendarDate issuance) const;
  bool obs_allowed(CalendarDate t) const { return t <= horizon_.obs_cutoff; }

 private:
  AccessHorizon horizon_;
  AccessAudit* audit_;
};

}  // namespace subseas

#endif  // SUBSEAS_OBSERVABLE_H_
