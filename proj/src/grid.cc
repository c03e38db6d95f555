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

#include "subseas/grid.h"

#include <string>

#include "subseas/error.h"

namespace subseas {

Grid::Grid(std::vector<GridPoint> points) : points_(std::move(points)) {
  for (size_t g = 0; g < points_.size(); ++g) {
    auto [it, inserted] =
        index_.emplace(std::make_pair(points_[g].lat, points_[g].lon), g);
    if (!inserted) {
      throw DataError("duplicate grid point (" + std::to_string(points_[g].lat) +
                      ", " + std::to_string(points_[g].lon) + ")");
    }
  }
}

std::optional<size_t> Grid::index_of(GridPoint p) const {
  auto it = index_.find({p.lat, p.lon});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Grid Grid::Lattice(double lat0, double lon0, double step, size_t rows,
                   size_t cols) {
  std::vector<GridPoint> pts;
  pts.reserve(rows * cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      pts.push_back({lat0 + step * static_cast<double>(r),
                     lon0 + step * static_cast<double>(c)});
    }
  }
  return Grid(std::move(pts));
}

}  // namespace subseas
