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

#ifndef MPLAN_WORLD_HPP_
#define MPLAN_WORLD_HPP_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mplan/costmap.hpp"
#include "mplan/geometry.hpp"

namespace mplan
{

/// Lane as a lateral strip of the road reference frame.
struct Lane
{
  int id{0};
  double d_center{0.0};
  double width{3.5};

  double d_right() const { return d_center - 0.5 * width; }
  double d_left() const { return d_center + 0.5 * width; }
  bool contains(double d) const { return d >= d_right() && d < d_left(); }
};

/// Reference path plus lanes ordered right to left (increasing d).
struct Road
{
  ReferencePath reference;
  std::vector<Lane> lanes;

  const Lane * lane_by_id(int id) const;
  /// Position of lane `id` in `lanes`, or -1.
  int lane_index(int id) const;
  /// Lane containing lateral offset d, nearest lane when off-road.
  const Lane & lane_at(double d) const;
  ReferencePath lane_line(int lane_id, bool left) const;
  double d_min() const { return lanes.front().d_right(); }
  double d_max() const { return lanes.back().d_left(); }
};

struct VehicleState
{
  double s{0.0};
  double d{0.0};
  double v{0.0};
  int lane_id{0};
  double width{1.8};
  double length{4.5};
};

struct VehicleObservation
{
  int id{0};
  VehicleState state;
  double accel{0.0};
  double lateral_velocity{0.0};
};

struct PredictedTrajectory
{
  int vehicle_id{0};
  std::vector<VehicleState> states;            // N + 1 samples at dt
  std::vector<std::vector<int>> occupied_lanes;  // per step, 1 or 2 lane ids
  bool is_reference{false};
  bool adjusted{false};
  /// First step where the adjustment needed more than the configured cap.
  std::optional<int> cap_exceeded_at;

  int lane_id() const { return states.front().lane_id; }
  bool occupies(int lane_id) const;
};

/// Velocity-dependent bound, linear between knots and flat outside.
class PiecewiseLinear
{
public:
  PiecewiseLinear() = default;
  explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);
  static PiecewiseLinear constant(double value) { return PiecewiseLinear({{0.0, value}}); }

  double operator()(double x) const;
  const std::vector<std::pair<double, double>> & knots() const { return knots_; }

private:
  std::vector<std::pair<double, double>> knots_;
};

struct MobilityModel
{
  PiecewiseLinear decel_of_v{PiecewiseLinear::constant(4.0)};
  PiecewiseLinear accel_of_v{PiecewiseLinear::constant(2.0)};
  double a_cen{2.0};
  double a_dec{0.5};
  double v_max{60.0 / 3.6};

  /// Throws PlanningError if a bound is non-positive somewhere on [0, v_max].
  void validate() const;
};

struct WorldSnapshot
{
  Road road;
  CostMap cost_map;
  VehicleState ego;
  double ego_lateral_velocity{0.0};
  std::vector<PredictedTrajectory> vehicles;
  MobilityModel mobility;
  double v_sig{50.0 / 3.6};
  double dt{0.25};
  int steps{40};
};

/**
 * Constant-kinematics prediction over `steps` intervals of `dt`. Vehicles
 * ahead of the ego that are accelerating are held at their current speed;
 * all others integrate the observed acceleration with speed floored at zero.
 */
std::vector<PredictedTrajectory> predict_trajectories(
  std::span<const VehicleObservation> vehicles, const Road & road, double ego_s, double dt,
  int steps);

/// Per lane, mark the nearest vehicle ahead of `ego_s` (or, failing that, the
/// nearest one behind) as the reference vehicle.
void classify_reference_vehicles(std::span<PredictedTrajectory> vehicles, double ego_s);

/**
 * Shift non-reference trajectories so same-lane trajectories never cross.
 * Vehicles are processed outward from the lane's reference vehicle; each keeps
 * at least (length of the vehicle in front) + d_safe of center spacing to its
 * neighbor. Shifts larger than cap_ratio * length are applied but recorded in
 * `cap_exceeded_at`.
 */
void adjust_non_reference_trajectories(
  std::span<PredictedTrajectory> vehicles, double dt, double d_safe, double cap_ratio);

/// Occupied lanes of a footprint centered at d with the given width.
std::vector<int> occupied_lanes(const Road & road, double d, double width);

}  // namespace mplan

#endif  // MPLAN_WORLD_HPP_
