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

#include <algorithm>

#include <gtest/gtest.h>

#include "mplan/maneuver.hpp"
#include "mplan/planner.hpp"
#include "mplan/scenario.hpp"
#include "support/scenes.hpp"

namespace mplan
{
namespace
{

PlanningInput first_cycle_input(const Scenario & sc)
{
  PlanningInput in;
  in.road = &sc.road;
  in.obstacles = sc.obstacles;
  in.ego = sc.ego;
  in.ego_lateral_velocity = sc.ego_lateral_velocity;
  for (const auto & v : sc.vehicles) {
    in.vehicles.push_back(v.observe(0.0, sc.road));
  }
  in.mobility = sc.mobility;
  in.v_sig = sc.v_sig;
  return in;
}

Maneuver with_cost(int id, double total, std::vector<int> lanes)
{
  Maneuver m;
  m.id = id;
  m.lane_sequence = std::move(lanes);
  m.result = OptimizationResult{};
  m.cost.total = total;
  return m;
}

TEST(EmergencyMerge, FirstCycleStructure)
{
  const auto sc = load_scenario(scenes::scenario_path("emergency_merge.json"));
  Planner planner(sc.planner);
  const auto in = first_cycle_input(sc);
  const auto res = planner.plan(in);

  EXPECT_GE(res.dynamic_topology.routes.size(), 4u);
  EXPECT_EQ(res.feasible_count(), 3);
  int merges = 0;
  int stops = 0;
  int pruned_merges = 0;
  for (const auto & m : res.maneuvers) {
    const bool merge = m.lane_sequence == std::vector<int>{0, 1};
    if (m.feasible && m.result) {
      merges += merge ? 1 : 0;
      const bool stop = m.lane_sequence == std::vector<int>{0} && m.result->limits.stop;
      stops += stop ? 1 : 0;
    } else if (merge && m.rejection.find("static collision") != std::string::npos) {
      ++pruned_merges;
      // The pruned variant is the one ahead of every left-lane vehicle.
      const auto & end = res.dynamic_topology.profiles.profiles[static_cast<std::size_t>(m.route.chain.back())];
      EXPECT_EQ(end.front_vehicle, -1);
    }
  }
  EXPECT_EQ(merges, 2);
  EXPECT_EQ(stops, 1);
  EXPECT_EQ(pruned_merges, 1);
  ASSERT_GE(res.selected, 0);
  EXPECT_EQ(res.chosen.lane_sequence, (std::vector<int>{0, 1}));
  EXPECT_FALSE(res.metrics.emergency);
}

TEST(EmergencyMerge, SelectedTrajectoryHasHorizonLength)
{
  const auto sc = load_scenario(scenes::scenario_path("emergency_merge.json"));
  Planner planner(sc.planner);
  const auto res = planner.plan(first_cycle_input(sc));
  const auto * traj = res.chosen.trajectory();
  ASSERT_NE(traj, nullptr);
  EXPECT_EQ(traj->size(), static_cast<std::size_t>(sc.planner.steps) + 1);
  EXPECT_NEAR(traj->s.front(), sc.ego.s, 1e-2);
  EXPECT_NEAR(traj->d.front(), sc.ego.d, 1e-2);
  for (std::size_t k = 1; k < traj->size(); ++k) {
    EXPECT_GE(traj->s[k], traj->s[k - 1] - 1e-6);
  }
}

TEST(Grouping, PartialLaneChangeOnOpenThreeLaneRoad)
{
  // Corridors only run to terminal bands, so {0, 1} has no corridor of its
  // own; the route still gets one over a superset of its lanes.
  const Road road = scenes::straight_road(600.0, {{0, 0.0, 3.5}, {1, 3.5, 3.5}, {2, 7.0, 3.5}});
  PlanningInput in;
  in.road = &road;
  in.ego.s = 20.0;
  in.ego.v = 12.0;
  VehicleObservation lead;
  lead.id = 1;
  lead.state.s = 45.0;
  lead.state.v = 4.0;
  in.vehicles.push_back(lead);
  Planner planner;
  const auto res = planner.plan(in);
  bool left = false;
  for (const auto & m : res.maneuvers) {
    left = left || (m.lane_sequence == std::vector<int>{0, 1} && m.feasible && m.result);
    if (m.lane_sequence == std::vector<int>{0, 1}) {
      EXPECT_TRUE(std::includes(
        m.corridor.involved_lanes.begin(), m.corridor.involved_lanes.end(), m.involved_lanes.begin(),
        m.involved_lanes.end()));
    }
  }
  EXPECT_TRUE(left);
  EXPECT_EQ(res.chosen.lane_sequence.front(), 0);
  EXPECT_EQ(res.chosen.lane_sequence.back(), 1);
}

TEST(Selection, LowestCostThenFewestLaneChanges)
{
  std::vector<Maneuver> ms{
    with_cost(0, 2.0, {0}), with_cost(1, 1.0, {0, 1}), with_cost(2, 1.0, {0}),
    with_cost(3, 0.5, {0, 1, 0})};
  ms[3].feasible = false;
  EXPECT_EQ(select_maneuver(ms), 2);
  ms[2].result.reset();
  EXPECT_EQ(select_maneuver(ms), 1);
  std::vector<Maneuver> none;
  EXPECT_EQ(select_maneuver(none), -1);
}

TEST(EmergencyStopTest, FollowsBrakingBoundInLane)
{
  VehicleState ego;
  ego.s = 5.0;
  ego.d = 0.4;
  ego.v = 10.0;
  ego.lane_id = 3;
  const auto base = build_base_profile(ego.s, ego.v, MobilityModel{}, 0.25, 40);
  const auto m = emergency_stop(ego, base, 0.25);
  EXPECT_TRUE(m.emergency);
  EXPECT_EQ(m.id, -1);
  EXPECT_EQ(m.lane_sequence, std::vector<int>{3});
  ASSERT_NE(m.trajectory(), nullptr);
  EXPECT_EQ(m.trajectory()->s, base.lower);
  EXPECT_TRUE(std::all_of(
    m.trajectory()->d.begin(), m.trajectory()->d.end(), [](double d) { return d == 0.4; }));
}

TEST(Collision, DetectsVehicleOverlapAndLethalCells)
{
  const Road road = scenes::straight_road(200.0, {{0, 0.0, 3.5}, {1, 3.5, 3.5}});
  Trajectory traj;
  traj.dt = 0.25;
  for (int k = 0; k <= 8; ++k) {
    traj.s.push_back(10.0 + 2.0 * k);
    traj.d.push_back(0.0);
  }
  PredictedTrajectory other;
  other.vehicle_id = 4;
  for (int k = 0; k <= 8; ++k) {
    VehicleState st;
    st.s = 30.0 - 1.0 * k;  // oncoming in the same lane
    other.states.push_back(st);
  }
  CostMapSpec spec;
  spec.origin = {0.0, -5.0};
  spec.rows = 60;
  spec.cols = 200;
  const CostMap empty(spec);
  const std::vector<PredictedTrajectory> vehicles{other};
  const auto hit = check_collision(traj, vehicles, road, empty, 4.5, 1.8);
  EXPECT_TRUE(hit.collides);
  EXPECT_GT(hit.step, 0);

  const std::vector<Polygon> wall{{{20.0, -1.0}, {21.0, -1.0}, {21.0, 1.0}, {20.0, 1.0}}};
  const auto map = rasterize_obstacles(wall, spec, 0.0);
  EXPECT_TRUE(check_collision(traj, {}, road, map, 4.5, 1.8).collides);
  EXPECT_FALSE(check_collision(traj, {}, road, empty, 4.5, 1.8).collides);
}

}  // namespace
}  // namespace mplan
