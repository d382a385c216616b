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

#ifndef MPLAN_ROUTE_HPP_
#define MPLAN_ROUTE_HPP_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mplan/config.hpp"
#include "mplan/world.hpp"

namespace mplan
{

/// Reachable s-range of the ego: full braking (lower) and full acceleration
/// capped at v_max (upper), sampled at dt.
struct BaseProfile
{
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> v_lower;
  std::vector<double> v_upper;
};

BaseProfile build_base_profile(
  double s0, double v0, const MobilityModel & mobility, double dt, int steps, int substeps = 20);

/**
 * Collision-free s-t zone of one lane. The zone exists on the contiguous
 * step range [k_begin, k_end]; outside it the bound vectors hold NaN.
 */
struct TrajectoryProfile
{
  int id{0};
  int lane_id{0};
  int zone{0};
  int k_begin{0};
  int k_end{0};
  std::vector<double> lower;
  std::vector<double> upper;
  int rear_vehicle{-1};   // vehicle id bounding the zone from below, -1 = none
  int front_vehicle{-1};  // vehicle id bounding the zone from above, -1 = none
  bool contains_ego{false};
  bool constrained{false};  // root zone kept despite being narrow or relaxed

  bool exists(int k) const { return k >= k_begin && k <= k_end; }
  double max_height() const;
};

/// Lower and upper s of P ∩ Q at step k; nullopt when either is absent.
std::optional<std::pair<double, double>> profile_overlap(
  const TrajectoryProfile & p, const TrajectoryProfile & q, int k);

struct ManeuverWindow
{
  double br{0.0};
  double bl{0.0};
  double fr{0.0};
  double fl{0.0};
  double te{3.0};
  int source{-1};  // profile ids
  int target{-1};

  /// Some start time Tb in [br, bl] with Tb + te in [fr, fl].
  bool feasible() const;
};

struct Route
{
  std::vector<int> chain;  // profile ids, root first
  std::vector<ManeuverWindow> windows;
  bool feasible{true};
};

struct ProfileSet
{
  std::vector<TrajectoryProfile> profiles;
  int root{-1};
  int discarded_narrow{0};
  std::vector<int> dropped_vehicles;  // never inside the base profile
};

/**
 * Split the base profile of the ego lane and its neighbours by the predicted
 * vehicles. Each vehicle blocks [s - (L_v + L_e) / 2 - d_safe,
 * s + (L_v + L_e) / 2 + d_safe] for the ego center at every step.
 */
ProfileSet generate_profiles(
  const BaseProfile & base, const Road & road, const VehicleState & ego,
  std::span<const PredictedTrajectory> vehicles, const RouteConfig & config);

/// Level-wise chain expansion from the root profile up to `max_chain`.
std::vector<Route> connect_profiles(
  const ProfileSet & set, const Road & road, const RouteConfig & config);

/// Fill the windows of every transition of `route` and its feasibility.
void compute_maneuver_windows(
  Route & route, const ProfileSet & set, double dt, const RouteConfig & config);

struct DynamicTopology
{
  BaseProfile base;
  ProfileSet profiles;
  std::vector<Route> routes;
};

DynamicTopology build_dynamic_topology(
  const Road & road, const VehicleState & ego, std::span<const PredictedTrajectory> vehicles,
  const MobilityModel & mobility, double dt, int steps, const RouteConfig & config);

/// Lane ids of a route's chain in order.
std::vector<int> route_lanes(const Route & route, const ProfileSet & set);

}  // namespace mplan

#endif  // MPLAN_ROUTE_HPP_
