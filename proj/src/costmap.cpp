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

#include "mplan/costmap.hpp"

#include <algorithm>
#include <cmath>

#include "mplan/errors.hpp"

namespace mplan
{

CostMap::CostMap(const CostMapSpec & spec) : spec_(spec)
{
  if (spec.rows <= 0 || spec.cols <= 0 || !(spec.resolution > 0.0)) {
    throw PlanningError("invalid cost map dimensions");
  }
  cells_.assign(static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols), kFreeCell);
}

Vec2 CostMap::cell_center(int row, int col) const
{
  return {
    spec_.origin.x + (col + 0.5) * spec_.resolution,
    spec_.origin.y + (row + 0.5) * spec_.resolution};
}

bool CostMap::world_to_cell(const Vec2 & p, int & row, int & col) const
{
  col = static_cast<int>(std::floor((p.x - spec_.origin.x) / spec_.resolution));
  row = static_cast<int>(std::floor((p.y - spec_.origin.y) / spec_.resolution));
  return in_bounds(row, col);
}

std::uint8_t CostMap::cost_at(const Vec2 & p) const
{
  int row = 0;
  int col = 0;
  if (cells_.empty() || !world_to_cell(p, row, col)) {
    return kFreeCell;
  }
  return at(row, col);
}

bool point_in_polygon(const Vec2 & p, std::span<const Vec2> polygon)
{
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 & a = polygon[i];
    const Vec2 & b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

CostMap rasterize_obstacles(
  std::span<const Polygon> obstacles, const CostMapSpec & spec, double inflation_radius)
{
  CostMap map(spec);
  const double res = spec.resolution;
  // Bounding box of painted cells; inflation only scans inside it.
  int lr0 = spec.rows;
  int lr1 = -1;
  int lc0 = spec.cols;
  int lc1 = -1;

  for (const auto & poly : obstacles) {
    if (poly.size() < 3) {
      continue;
    }
    double xmin = poly[0].x;
    double xmax = poly[0].x;
    double ymin = poly[0].y;
    double ymax = poly[0].y;
    for (const auto & v : poly) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
      ymin = std::min(ymin, v.y);
      ymax = std::max(ymax, v.y);
    }
    const int c0 = std::max(0, static_cast<int>(std::floor((xmin - spec.origin.x) / res)));
    const int c1 = std::min(spec.cols - 1, static_cast<int>(std::floor((xmax - spec.origin.x) / res)));
    const int r0 = std::max(0, static_cast<int>(std::floor((ymin - spec.origin.y) / res)));
    const int r1 = std::min(spec.rows - 1, static_cast<int>(std::floor((ymax - spec.origin.y) / res)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (point_in_polygon(map.cell_center(r, c), poly)) {
          map.set(r, c, kLethalCell);
          lr0 = std::min(lr0, r);
          lr1 = std::max(lr1, r);
          lc0 = std::min(lc0, c);
          lc1 = std::max(lc1, c);
        }
      }
    }
  }

  if (!(inflation_radius > 0.0)) {
    return map;
  }

  // Inflation kernel in cell units; only lethal cells on the boundary of a
  // lethal blob can reach free cells.
  const double radius_cells = inflation_radius / res;
  const int reach = static_cast<int>(std::ceil(radius_cells));
  struct Offset
  {
    int dr;
    int dc;
    std::uint8_t cost;
  };
  std::vector<Offset> kernel;
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      const double dist = std::hypot(dr, dc);
      if ((dr == 0 && dc == 0) || dist > radius_cells + 1e-9) {
        continue;
      }
      const double fall = 1.0 - dist / (radius_cells + 1.0);
      kernel.push_back({dr, dc, static_cast<std::uint8_t>(std::clamp(253.0 * fall, 1.0, 253.0))});
    }
  }

  // Inflation never writes lethal cells, so the map itself tells which cells
  // were lethal before it started.
  auto is_lethal = [&](int r, int c) { return map.in_bounds(r, c) && map.at(r, c) == kLethalCell; };
  for (int r = lr0; r <= lr1; ++r) {
    for (int c = lc0; c <= lc1; ++c) {
      if (!is_lethal(r, c)) {
        continue;
      }
      const bool interior = is_lethal(r - 1, c) && is_lethal(r + 1, c) && is_lethal(r, c - 1) &&
                            is_lethal(r, c + 1);
      if (interior) {
        continue;
      }
      for (const auto & k : kernel) {
        const int rr = r + k.dr;
        const int cc = c + k.dc;
        if (!map.in_bounds(rr, cc)) {
          continue;
        }
        const std::uint8_t cur = map.at(rr, cc);
        if (cur != kLethalCell && cur < k.cost) {
          map.set(rr, cc, k.cost);
        }
      }
    }
  }
  return map;
}

}  // namespace mplan
