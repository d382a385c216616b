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

#ifndef MPLAN_MANEUVER_HPP_
#define MPLAN_MANEUVER_HPP_

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mplan/config.hpp"
#include "mplan/corridor.hpp"
#include "mplan/costmap.hpp"
#include "mplan/optimizer.hpp"
#include "mplan/route.hpp"

namespace mplan
{

struct CostBreakdown
{
  double comfort{0.0};
  double safety{0.0};
  double efficiency{0.0};
  double bonus{0.0};  // drive-lane and persistence credit, subtracted
  double total{0.0};
};

struct Maneuver
{
  int id{0};
  std::string key;                 // stable identity across cycles
  int corridor_index{-1};
  int route_index{-1};
  Corridor corridor;
  Route route;
  std::vector<ManeuverWindow> windows;  // after truncation
  std::vector<int> involved_lanes;      // sorted, unique
  std::vector<int> lane_sequence;       // route lanes in order
  bool feasible{true};
  std::string rejection;                // why it was pruned
  std::optional<OptimizationResult> result;
  CostBreakdown cost;
  int age{0};
  bool emergency{false};

  int lane_changes() const { return static_cast<int>(lane_sequence.size()) - 1; }
  const Trajectory * trajectory() const { return result ? &result->trajectory : nullptr; }
};

/// Pair every route with the corridors over the same set of lanes, or, when
/// there are none, with those over the smallest superset of its lanes.
std::vector<Maneuver> group_maneuvers(
  std::span<const Corridor> corridors, std::span<const Route> routes, const ProfileSet & profiles);

/// Latest begin/finish of each transition is clipped to the time at which the
/// overlap's rear bound (ego front) reaches the end of the source lane's
/// coverage in the corridor.
void truncate_windows(
  Maneuver & maneuver, const Road & road, const ProfileSet & profiles, double dt,
  double ego_length);

/// End s of the corridor's coverage of a lane (its center inside the bounds);
/// +inf when the corridor is open and covers the lane throughout.
double lane_coverage_end(const Corridor & corridor, const Lane & lane);

struct CollisionReport
{
  bool collides{false};
  int step{-1};
  std::string reason;
  double min_gap{std::numeric_limits<double>::infinity()};
};

/// Rectangle test against predicted vehicles in the s-d frame plus lethal
/// cost-map cells under the ego footprint.
CollisionReport check_collision(
  const Trajectory & trajectory, std::span<const PredictedTrajectory> vehicles, const Road & road,
  const CostMap & cost_map, double ego_length, double ego_width);

CostBreakdown score_maneuver(
  const Maneuver & maneuver, const Road & road, double min_gap, const MobilityModel & mobility,
  const SelectionConfig & config);

/// Index of the best feasible maneuver with trajectory, or -1.
int select_maneuver(std::span<const Maneuver> maneuvers);

/// Full-braking stop in the current lane.
Maneuver emergency_stop(const VehicleState & ego, const BaseProfile & base, double dt);

}  // namespace mplan

#endif  // MPLAN_MANEUVER_HPP_
