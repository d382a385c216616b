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

#ifndef MPLAN_CORRIDOR_HPP_
#define MPLAN_CORRIDOR_HPP_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mplan/config.hpp"
#include "mplan/costmap.hpp"
#include "mplan/world.hpp"

namespace mplan
{

/// Lateral strip of a lane. Global band indices grow from the leftmost band
/// of the leftmost lane towards the right.
struct Band
{
  int index{0};
  int lane_id{0};
  double d_lower{0.0};
  double d_upper{0.0};
  bool lower_on_lane_line{false};
  bool upper_on_lane_line{false};

  double width() const { return d_upper - d_lower; }
};

/// Maximal obstacle-free longitudinal interval [s_start, s_end) of a band.
struct Section
{
  int id{0};        // position in SectionGraph::sections
  int lane_id{0};
  int band{0};
  int index{0};     // 0 = nearest ahead of the ego
  double s_start{0.0};
  double s_end{0.0};
  double d_lower{0.0};
  double d_upper{0.0};

  double length() const { return s_end - s_start; }
  double d_center() const { return 0.5 * (d_lower + d_upper); }
  double band_width() const { return d_upper - d_lower; }
};

/// Longitudinal overlap of two sections (negative when disjoint).
double section_overlap(const Section & a, const Section & b);

struct SectionGraph
{
  std::vector<Band> bands;
  std::vector<Section> sections;
  std::vector<std::vector<int>> adjacency;  // sorted by (band, index)
  int root{-1};
};

struct EndSections
{
  std::vector<int> terminals;  // section ids; the root is always present
  std::vector<int> parent;     // per section id, -1 when unreached or root
  int rounds{0};
};

struct Corridor
{
  std::vector<Section> chain;        // root first; the terminal is trimmed
  std::vector<Section> complements;  // sections borrowed from other corridors
  std::vector<int> involved_lanes;   // sorted lane ids of the chain
  double s0{0.0};
  double step{0.2};
  std::vector<double> d_lower;       // samples at s0 + i * step
  std::vector<double> d_upper;
  double effective_length{0.0};
  bool blocked{false};  // bounds end before the sampled horizon

  int terminal_id() const { return chain.back().id; }
  double s_end() const { return s0 + effective_length; }
  /// Interpolated bounds; nullopt outside [s0, s_end()).
  std::optional<std::pair<double, double>> bounds_at(double s) const;
};

/// Minimum drivable width: max(3 * band width, vehicle width + 2 * d_safe).
double min_drivable_width(double band_width, double vehicle_width, double d_safe);

std::vector<Band> make_bands(const Road & road, int bands_per_lane);

/**
 * Cut every band into free intervals on [s_begin, s_end). A band is blocked
 * at a longitudinal sample if any cost-map cell under its lateral extent is
 * non-free. Only the first `max_sections_per_band` intervals are kept.
 */
std::vector<Section> split_into_sections(
  const Road & road, const CostMap & cost_map, std::span<const Band> bands, double s_begin,
  double s_end, const CorridorConfig & config);

/// Connect sections of adjacent bands whose overlap reaches the vehicle
/// width. Throws PlanningError "root section not found".
SectionGraph connect_section_graph(
  std::vector<Band> bands, std::vector<Section> sections, double ego_s, double ego_d,
  const CorridorConfig & config);

/// Frontier expansion from the root; the first visitor claims a section.
EndSections generate_end_sections(const SectionGraph & graph);

std::vector<Corridor> generate_corridors(
  const SectionGraph & graph, const EndSections & ends, const Road & road, double s_begin,
  double s_end, const CorridorConfig & config);

struct StaticTopology
{
  SectionGraph graph;
  EndSections ends;
  std::vector<Corridor> corridors;
};

StaticTopology build_static_topology(
  const Road & road, const CostMap & cost_map, double ego_s, double ego_d, double horizon,
  const CorridorConfig & config);

}  // namespace mplan

#endif  // MPLAN_CORRIDOR_HPP_
