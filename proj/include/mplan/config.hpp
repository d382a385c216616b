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

#ifndef MPLAN_CONFIG_HPP_
#define MPLAN_CONFIG_HPP_

namespace mplan
{

/// Static-topology parameters.
struct CorridorConfig
{
  int bands_per_lane{7};
  int max_sections_per_band{3};
  double vehicle_width{1.8};   // also the minimum s-overlap for connecting sections
  double d_safe{0.3};
  double prune_ratio{0.5};     // terminal dropped when shorter than ratio * parent
  int smoothing_window{5};     // samples; 1 disables smoothing
  double sample_step{0.2};     // longitudinal sampling of bounds [m]
};

/// Dynamic-topology parameters.
struct RouteConfig
{
  double ego_length{4.5};
  double d_safe{0.3};
  double lane_change_duration{3.0};  // Te [s]
  int max_chain{3};
  double window_min_overlap{0.0};    // [m] of s-overlap between chain profiles
  int integration_substeps{20};
};

/// Soft-constraint weights for the two quadratic solves.
struct OptimizerWeights
{
  double lon_accel{1.0};
  double lon_jerk{1.0};
  double lon_start_pos{1e4};        // start pins the plan to the ego
  double lon_anchor_pos{100.0};
  double lon_anchor_vel{100.0};
  double lat_accel{1.0};
  double lat_jerk{2.0};
  double lat_pos{10.0};
  double lat_pos_transition_gain{10.0};
  double lat_vel_base{1.0};
  double lat_vel_offset_gain{4.0};   // omega_v = base * (1 + gain * d0^2)
  double lat_start_pos{1e5};
  double lat_start_vel{100.0};
  double feasibility_weight{50.0};   // per-step position weight added on violation
  int feasibility_rounds{4};
};

struct SolverTolerances
{
  double gradient{1e-8};
  double step{1e-10};
  int max_iterations{200};
};

struct OptimizerConfig
{
  OptimizerWeights weights{};
  SolverTolerances tolerances{};
  double t_delay{1.5};         // perception + decision + brake lag [s]
  double alpha_extra{0.5};     // [s]
  double extra_min{2.0};       // [m]
  double d_safe_projected{0.3};
  double vehicle_width{1.8};
  double vehicle_length{4.5};
  double transition_threshold{0.5};  // [m] guess jump that marks a transition step
};

struct SelectionConfig
{
  double comfort_weight{1.0};
  double safety_weight{2.0};
  double efficiency_weight{1.0};
  double drive_lane_bonus{0.5};
  double persistence_bonus{0.2};  // per cycle of age, saturating
  int max_age{10};
  double stop_penalty{2.0};       // standstill before a static blockage: last resort
  double commitment_bonus{0.5};   // ends in the lane the previous selection was heading to
  double settle_tolerance{0.3};   // [m] lane change counts as finished within this of the center
};

struct PlannerConfig
{
  double dt{0.25};
  int steps{40};
  double d_safe{0.3};
  double adjust_cap_ratio{0.5};
  double costmap_resolution{0.2};
  int costmap_rows{250};
  int costmap_cols{800};
  double costmap_behind{10.0};  // map extent behind the ego [m]
  CorridorConfig corridor{};
  RouteConfig route{};
  OptimizerConfig optimizer{};
  SelectionConfig selection{};
};

}  // namespace mplan

#endif  // MPLAN_CONFIG_HPP_
