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

#ifndef SUBSEAS_QUANTILE_H_
#define SUBSEAS_QUANTILE_H_

#include <span>
#include <vector>

namespace subseas {

// Library-wide quantile convention: linear interpolation between order
// statistics at position p * (n - 1). `sorted` must be ascending, non-empty.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

// Inverse of quantile_sorted: the probability p with quantile_sorted(p) == v
// for v inside the sample range (midpoint of the flat range on ties), 0 below
// the minimum and 1 above the maximum. A single-sample set maps its value to
// 0.5.
double quantile_rank_sorted(std::span<const double> sorted, double v);

}  // namespace subseas

#endif  // SUBSEAS_QUANTILE_H_
