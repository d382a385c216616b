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

#ifndef MPLAN_SCENARIO_HPP_
#define MPLAN_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mplan/config.hpp"
#include "mplan/costmap.hpp"
#include "mplan/world.hpp"

namespace mplan
{

inline constexpr int kScenarioSchemaVersion = 1;

enum class MotionType
{
  kConstantSpeed,
  kConstantAccel,
  kWaypoints,
};

struct Waypoint
{
  double t{0.0};
  double s{0.0};
  double d{0.0};
};

/// Scripted vehicle. Motion is evaluated in closed form, so every query
/// time is independent of the simulation step.
struct VehicleScript
{
  int id{0};
  VehicleState initial;
  MotionType motion{MotionType::kConstantSpeed};
  double accel{0.0};
  double speed_cap{1e9};       // constant_accel: speed where acceleration stops
  std::vector<Waypoint> waypoints;

  VehicleObservation observe(double t, const Road & road) const;
};

struct RunSettings
{
  double duration{15.0};
  double replan_period{0.1};
  double sim_step{0.05};
  std::uint64_t seed{0};
};

/// Seeded generator of constant-speed vehicles.
struct TrafficSettings
{
  int count{0};
  std::vector<int> lanes;   // empty = every lane
  double s_min{0.0};
  double s_max{100.0};
  double v_min{5.0};
  double v_max{15.0};
  double min_gap{10.0};     // same-lane center spacing at t = 0
};

struct Scenario
{
  int schema_version{kScenarioSchemaVersion};
  std::string name;
  Road road;
  std::vector<Polygon> obstacles;
  std::vector<VehicleScript> vehicles;
  VehicleState ego;
  double ego_lateral_velocity{0.0};
  MobilityModel mobility;
  double v_sig{50.0 / 3.6};
  RunSettings run;
  std::optional<TrafficSettings> traffic;
  PlannerConfig planner;
};

/// Parse and validate. Errors carry the JSON path of the offending field.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path & path);

/// Append generated traffic (no-op without a traffic block). Deterministic
/// for a given seed.
void populate_traffic(Scenario & scenario, std::uint64_t seed);

/// Rectangle between two offsets of the reference, sampled every `spacing`.
Polygon frenet_box(
  const Road & road, double s_start, double s_end, double d_min, double d_max,
  double spacing = 1.0);

}  // namespace mplan

#endif  // MPLAN_SCENARIO_HPP_
