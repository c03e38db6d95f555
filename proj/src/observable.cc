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

#include "subseas/observable.h"

#include "subseas/error.h"

namespace subseas {

void AccessAudit::raise_max(std::atomic<int64_t>& slot, int64_t v) {
  int64_t cur = slot.load();
  while (v > cur && !slot.compare_exchange_weak(cur, v)) {
  }
}

void AccessAudit::record_obs(int64_t excess_days) {
  obs_reads_.fetch_add(1, std::memory_order_relaxed);
  if (excess_days > 0) violations_.fetch_add(1);
  raise_max(max_obs_excess_, excess_days);
}

void AccessAudit::record_forecast(int64_t excess_days) {
  forecast_reads_.fetch_add(1, std::memory_order_relaxed);
  if (excess_days > 0) violations_.fetch_add(1);
  raise_max(max_forecast_excess_, excess_days);
}

void DataGuard::obs(CalendarDate t) const {
  const int64_t excess = t - horizon_.obs_cutoff;
  if (audit_) audit_->record_obs(excess);
  if (excess > 0) {
    throw LeakageError("observation " + t.iso() + " is not observable for target " +
                       horizon_.target.iso() + " (cutoff " +
                       horizon_.obs_cutoff.iso() + ")");
  }
}

void DataGuard::forecast(CalendarDate issuance) const {
  const int64_t excess = issuance - horizon_.issuance_cutoff;
  if (audit_) audit_->record_forecast(excess);
  if (excess > 0) {
    throw LeakageError("forecast issued " + issuance.iso() +
                       " is not available for target " + horizon_.target.iso() +
                       " (issuance " + horizon_.issuance_cutoff.iso() + ")");
  }
}

}  // namespace subseas
