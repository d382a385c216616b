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

#ifndef MPLAN_PLANNER_HPP_
#define MPLAN_PLANNER_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mplan/config.hpp"
#include "mplan/corridor.hpp"
#include "mplan/costmap.hpp"
#include "mplan/maneuver.hpp"
#include "mplan/route.hpp"
#include "mplan/world.hpp"

namespace mplan
{

struct PlanningInput
{
  const Road * road{nullptr};
  std::vector<Polygon> obstacles;  // world frame
  VehicleState ego;
  double ego_lateral_velocity{0.0};
  std::vector<VehicleObservation> vehicles;
  MobilityModel mobility;
  double v_sig{50.0 / 3.6};
};

/// Wall-clock timings of one cycle in milliseconds plus counts.
struct CycleMetrics
{
  int cycle{0};
  double time{0.0};              // simulated time [s]
  double t_static_topology{0.0};
  double t_dynamic_topology{0.0};
  double t_optimization{0.0};
  int maneuver_count{0};         // feasible maneuvers with a trajectory
  int selected_id{-1};           // -1 when the emergency stop is used
  int route_count{0};
  int corridor_count{0};
  bool emergency{false};
};

struct PlanningResult
{
  CostMap cost_map;
  StaticTopology static_topology;
  DynamicTopology dynamic_topology;
  std::vector<PredictedTrajectory> vehicles;
  std::vector<Maneuver> maneuvers;  // every candidate, pruned ones included
  int selected{-1};                 // index into maneuvers
  Maneuver chosen;                  // selected maneuver or the emergency stop
  CycleMetrics metrics;
  std::string failure;              // why the emergency stop was used

  int feasible_count() const;
};

class Planner
{
public:
  explicit Planner(PlannerConfig config = {});

  PlanningResult plan(const PlanningInput & input);

  const PlannerConfig & config() const { return config_; }
  /// Longitudinal extent of the static topology ahead of the ego [m].
  double static_horizon() const;
  CostMapSpec cost_map_spec(const Road & road, const VehicleState & ego) const;
  void reset()
  {
    ages_.clear();
    target_lane_.reset();
  }

private:
  PlannerConfig config_;
  std::map<std::string, int> ages_;  // consecutive cycles a key stayed feasible
  std::optional<int> target_lane_;   // final lane of the last selection
};

}  // namespace mplan

#endif  // MPLAN_PLANNER_HPP_
