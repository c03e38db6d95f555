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

#ifndef SUBSEAS_GRID_H_
#define SUBSEAS_GRID_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace subseas {

struct GridPoint {
  double lat = 0.0;  // degrees N
  double lon = 0.0;  // degrees E
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

// Ordered list of distinct grid points.
class Grid {
 public:
  Grid() = default;
  // Throws DataError on duplicate points.
  explicit Grid(std::vector<GridPoint> points);

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const GridPoint& operator[](size_t g) const { return points_[g]; }
  std::span<const GridPoint> points() const { return points_; }
  std::optional<size_t> index_of(GridPoint p) const;

  // Regular lat/lon lattice in row-major (lat outer) order.
  static Grid Lattice(double lat0, double lon0, double step, size_t rows,
                      size_t cols);

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_;
  }

 private:
  std::vector<GridPoint> points_;
  std::map<std::pair<double, double>, size_t> index_;
};

}  // namespace subseas

#endif  // SUBSEAS_GRID_H_
