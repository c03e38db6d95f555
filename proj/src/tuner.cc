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

#include <algorithm>
#include <cmath>
#include <string>

#include "subseas/correctors.h"
#include "subseas/error.h"
#include "subseas/log.h"

namespace subseas {

TuningRecord::TuningRecord(std::vector<CalendarDate> dates, size_t candidates)
    : dates_(std::move(dates)) {
  if (!std::is_sorted(dates_.begin(), dates_.end())) {
    throw DomainError("tuning record dates must be ascending");
  }
  rmse_.assign(candidates, std::vector<double>(dates_.size(), std::nan("")));
  sum_.assign(candidates, {});
  count_.assign(candidates, {});
}

void TuningRecord::set(size_t candidate, size_t date_index, double rmse) {
  rmse_.at(candidate).at(date_index) = rmse;
  finalized_ = false;
}

void TuningRecord::finalize() {
  for (size_t c = 0; c < rmse_.size(); ++c) {
    sum_[c].assign(dates_.size() + 1, 0.0);
    count_[c].assign(dates_.size() + 1, 0);
    for (size_t i = 0; i < dates_.size(); ++i) {
      const double v = rmse_[c][i];
      const bool ok = !std::isnan(v);
      sum_[c][i + 1] = sum_[c][i] + (ok ? v : 0.0);
      count_[c][i + 1] = count_[c][i] + (ok ? 1 : 0);
    }
  }
  finalized_ = true;
}

std::pair<double, size_t> TuningRecord::window(size_t candidate, size_t begin,
                                               size_t end) const {
  if (!finalized_) throw DomainError("tuning record queried before finalize()");
  if (begin >= end) return {0.0, 0};
  return {sum_[candidate][end] - sum_[candidate][begin],
          count_[candidate][end] - count_[candidate][begin]};
}

TuneResult tune(const TuningRecord& record, CalendarDate t_star,
                const DataGuard& guard, size_t fallback_index,
                double window_years, bool warn) {
  const auto dates = record.dates();
  const CalendarDate earliest =
      t_star - static_cast<int64_t>(std::floor(window_years * kDaysPerYear));
  const CalendarDate latest = guard.horizon().obs_cutoff;
  const size_t begin = std::lower_bound(dates.begin(), dates.end(), earliest) - dates.begin();
  const size_t end = std::upper_bound(dates.begin(), dates.end(), latest) - dates.begin();

  TuneResult best;
  bool found = false;
  for (size_t c = 0; c < record.candidates(); ++c) {
    auto [sum, count] = record.window(c, begin, end);
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    if (!found || mean < best.mean_rmse) {
      best = {c, false, mean, count};
      found = true;
    }
  }
  if (found) {
    guard.obs(dates[end - 1]);
    return best;
  }
  if (warn) {
    log::warn("tuner: no scored history before " + t_star.iso() +
              "; using the default configuration");
  }
  TuneResult out;
  out.index = fallback_index;
  out.fallback = true;
  out.mean_rmse = std::nan("");
  return out;
}

}  // namespace subseas
