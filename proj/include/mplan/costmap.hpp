// Copyright 2026 The Maneuver Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPLAN_COSTMAP_HPP_
#define MPLAN_COSTMAP_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mplan/geometry.hpp"

namespace mplan
{

using Polygon = std::vector<Vec2>;

inline constexpr std::uint8_t kFreeCell = 0;
inline constexpr std::uint8_t kLethalCell = 255;

struct CostMapSpec
{
  int rows{250};        // along y
  int cols{800};        // along x
  double resolution{0.2};
  Vec2 origin{};        // lower-left corner of cell (0, 0)
};

/// Axis-aligned occupancy grid. Row index grows with y, column index with x.
class CostMap
{
public:
  CostMap() = default;
  explicit CostMap(const CostMapSpec & spec);

  int rows() const { return spec_.rows; }
  int cols() const { return spec_.cols; }
  double resolution() const { return spec_.resolution; }
  const Vec2 & origin() const { return spec_.origin; }
  const CostMapSpec & spec() const { return spec_; }

  bool in_bounds(int row, int col) const
  {
    return row >= 0 && col >= 0 && row < spec_.rows && col < spec_.cols;
  }
  std::uint8_t at(int row, int col) const { return cells_[index(row, col)]; }
  void set(int row, int col, std::uint8_t v) { cells_[index(row, col)] = v; }

  Vec2 cell_center(int row, int col) const;
  /// Cell containing `p`; returns false when outside the map.
  bool world_to_cell(const Vec2 & p, int & row, int & col) const;

  /// Cost at a world point; points outside the map read as free.
  std::uint8_t cost_at(const Vec2 & p) const;
  bool is_lethal(const Vec2 & p) const { return cost_at(p) == kLethalCell; }

  std::span<const std::uint8_t> cells() const { return cells_; }

private:
  std::size_t index(int row, int col) const
  {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(spec_.cols) +
           static_cast<std::size_t>(col);
  }

  CostMapSpec spec_{};
  std::vector<std::uint8_t> cells_;
};

bool point_in_polygon(const Vec2 & p, std::span<const Vec2> polygon);

/**
 * Rasterize obstacle polygons: a cell whose center lies inside a polygon is
 * lethal; any other cell whose center lies within `inflation_radius` of a
 * lethal cell center carries an intermediate cost decreasing with distance.
 * Polygon parts outside the map are clipped.
 */
CostMap rasterize_obstacles(
  std::span<const Polygon> obstacles, const CostMapSpec & spec, double inflation_radius);

}  // namespace mplan

#endif  // MPLAN_COSTMAP_HPP_
