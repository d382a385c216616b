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

#ifndef MPLAN_SIMULATION_HPP_
#define MPLAN_SIMULATION_HPP_

#include <functional>
#include <string>
#include <vector>

#include "mplan/planner.hpp"
#include "mplan/scenario.hpp"

namespace mplan
{

struct ActorPose
{
  int id{0};
  double s{0.0};
  double d{0.0};
  double x{0.0};
  double y{0.0};
  double heading{0.0};
  double length{4.5};
  double width{1.8};
};

struct TraceSample
{
  double t{0.0};
  ActorPose ego;  // id 0
  double v{0.0};
  double a{0.0};
  double jerk{0.0};
  std::vector<ActorPose> actors;
};

struct SimulationOptions
{
  double replan_period{0.1};
  /// Called after every planning cycle, before the ego moves on.
  std::function<void(const PlanningInput &, const PlanningResult &)> on_cycle;
};

struct SimulationResult
{
  std::vector<TraceSample> trace;
  std::vector<CycleMetrics> cycles;
  std::vector<std::vector<int>> selected_lanes;  // per cycle
  bool collision{false};
  double collision_time{0.0};
  std::string collision_reason;
  int emergency_cycles{0};
  bool reached_road_end{false};
};

/// Oriented rectangle of a vehicle in the world frame.
Polygon footprint(const ActorPose & pose);

/// Pose at (s, d) with heading of the reference plus the drift angle.
ActorPose make_pose(
  const Road & road, int id, double s, double d, double v_s, double v_d, double length,
  double width);

/// True when two simple polygons share interior or boundary points.
bool polygons_overlap(const Polygon & a, const Polygon & b);

/**
 * Closed-loop run: scripted traffic is stepped at `run.sim_step`, the planner
 * runs every replan period and the ego follows the latest trajectory by
 * integrating its planned velocities. Stops at the first collision.
 */
SimulationResult run_simulation(const Scenario & scenario, const SimulationOptions & options);

}  // namespace mplan

#endif  // MPLAN_SIMULATION_HPP_
