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

#include "subseas/quantile.h"

#include <algorithm>
#include <cmath>

#include "subseas/error.h"

namespace subseas {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile_rank_sorted(std::span<const double> sorted, double v) {
  if (sorted.empty()) throw DomainError("quantile rank in an empty sample");
  const size_t n = sorted.size();
  if (v < sorted.front()) return 0.0;
  if (v > sorted.back()) return 1.0;
  if (n == 1) return 0.5;
  const double step = 1.0 / static_cast<double>(n - 1);
  // Order-statistic positions equal to v form a flat range of the quantile
  // function; take its midpoint.
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), v);
  auto hi = std::upper_bound(sorted.begin(), sorted.end(), v);
  if (lo != hi) {
    const double first = static_cast<double>(lo - sorted.begin());
    const double last = static_cast<double>(hi - sorted.begin() - 1);
    return 0.5 * (first + last) * step;
  }
  // Strictly between order statistics k and k+1.
  const size_t k = static_cast<size_t>(lo - sorted.begin()) - 1;
  const double frac = (v - sorted[k]) / (sorted[k + 1] - sorted[k]);
  return (static_cast<double>(k) + frac) * step;
}

}  // namespace subseas
