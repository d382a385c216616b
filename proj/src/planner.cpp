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

#include "mplan/planner.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "mplan/errors.hpp"

namespace mplan
{

namespace
{

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

int PlanningResult::feasible_count() const
{
  int n = 0;
  for (const auto & m : maneuvers) {
    n += (m.feasible && m.result) ? 1 : 0;
  }
  return n;
}

Planner::Planner(PlannerConfig config) : config_(config) {}

double Planner::static_horizon() const
{
  return config_.costmap_cols * config_.costmap_resolution - config_.costmap_behind - 1.0;
}

CostMapSpec Planner::cost_map_spec(const Road & road, const VehicleState & ego) const
{
  // Axis-aligned window reaching `costmap_behind` behind the ego along the
  // local heading and the rest of its length ahead.
  CostMapSpec spec;
  spec.rows = config_.costmap_rows;
  spec.cols = config_.costmap_cols;
  spec.resolution = config_.costmap_resolution;
  const double ex = spec.cols * spec.resolution;
  const double ey = spec.rows * spec.resolution;
  const Vec2 center = road.reference.to_cartesian(ego.s, ego.d) +
                      road.reference.tangent_at(ego.s) * (0.5 * ex - config_.costmap_behind);
  spec.origin = center - Vec2{0.5 * ex, 0.5 * ey};
  return spec;
}

PlanningResult Planner::plan(const PlanningInput & input)
{
  if (input.road == nullptr || input.road->lanes.empty()) {
    throw PlanningError("planning input has no road");
  }
  const Road & road = *input.road;
  input.mobility.validate();
  const double dt = config_.dt;
  const int steps = config_.steps;

  PlanningResult out;
  VehicleState ego = input.ego;
  ego.lane_id = road.lane_at(ego.d).id;

  // Static topology: rasterize obstacles, bands, sections, corridors.
  auto t0 = Clock::now();
  out.cost_map =
    rasterize_obstacles(input.obstacles, cost_map_spec(road, ego), config_.d_safe);
  bool static_ok = true;
  try {
    out.static_topology = build_static_topology(
      road, out.cost_map, ego.s, ego.d, static_horizon(), config_.corridor);
  } catch (const PlanningError & e) {
    static_ok = false;
    out.failure = e.what();
  }
  out.metrics.t_static_topology = elapsed_ms(t0);

  // Dynamic topology: predict, adjust, profiles, routes, windows.
  t0 = Clock::now();
  out.vehicles = predict_trajectories(input.vehicles, road, ego.s, dt, steps);
  classify_reference_vehicles(out.vehicles, ego.s);
  adjust_non_reference_trajectories(out.vehicles, dt, config_.d_safe, config_.adjust_cap_ratio);
  bool dynamic_ok = true;
  try {
    out.dynamic_topology = build_dynamic_topology(
      road, ego, out.vehicles, input.mobility, dt, steps, config_.route);
  } catch (const PlanningError & e) {
    dynamic_ok = false;
    out.failure = e.what();
    out.dynamic_topology.base =
      build_base_profile(ego.s, ego.v, input.mobility, dt, steps, config_.route.integration_substeps);
  }
  out.metrics.t_dynamic_topology = elapsed_ms(t0);

  // Optimization: group, truncate, solve, prune, select.
  t0 = Clock::now();
  const auto & dyn = out.dynamic_topology;
  if (static_ok && dynamic_ok) {
    out.maneuvers = group_maneuvers(out.static_topology.corridors, dyn.routes, dyn.profiles);
  }
  for (auto & m : out.maneuvers) {
    if (!m.feasible) {
      continue;
    }
    truncate_windows(m, road, dyn.profiles, dt, config_.route.ego_length);
    if (!m.feasible) {
      continue;
    }
    Route route = m.route;
    route.windows = m.windows;
    ManeuverContext ctx;
    ctx.road = &road;
    ctx.corridor = &m.corridor;
    ctx.route = &route;
    ctx.profiles = &dyn.profiles;
    ctx.base = &dyn.base;
    ctx.vehicles = out.vehicles;
    ctx.ego = ego;
    ctx.ego_lateral_velocity = input.ego_lateral_velocity;
    ctx.mobility = &input.mobility;
    ctx.v_sig = input.v_sig;
    ctx.dt = dt;
    ctx.steps = steps;
    m.result = optimize_maneuver(ctx, config_.optimizer);
    const auto hit = check_collision(
      m.result->trajectory, out.vehicles, road, out.cost_map, config_.optimizer.vehicle_length,
      config_.optimizer.vehicle_width);
    if (hit.collides) {
      m.feasible = false;
      m.rejection = "collision: " + hit.reason;
      continue;
    }
    const auto it = ages_.find(m.key);
    m.age = it == ages_.end() ? 0 : it->second;
    m.cost = score_maneuver(m, road, hit.min_gap, input.mobility, config_.selection);
    // Hysteresis against flip-flopping between near-equal lane choices.
    if (target_lane_ && !m.lane_sequence.empty() && m.lane_sequence.back() == *target_lane_) {
      m.cost.bonus += config_.selection.commitment_bonus;
      m.cost.total -= config_.selection.commitment_bonus;
    }
  }
  out.selected = select_maneuver(out.maneuvers);
  if (out.selected >= 0) {
    out.chosen = out.maneuvers[static_cast<std::size_t>(out.selected)];
  } else {
    if (out.failure.empty()) {
      out.failure = "no feasible maneuver";
    }
    spdlog::warn("emergency stop: {}", out.failure);
    out.chosen = emergency_stop(ego, dyn.base, dt);
  }
  out.metrics.t_optimization = elapsed_ms(t0);

  // A maneuver ages while it stays feasible; gaps reset it.
  std::map<std::string, int> ages;
  for (const auto & m : out.maneuvers) {
    if (m.feasible && m.result) {
      ages[m.key] = m.age + 1;
    }
  }
  ages_ = std::move(ages);
  // The commitment lasts while a lane change is under way.
  target_lane_.reset();
  if (out.selected >= 0 && !out.chosen.lane_sequence.empty()) {
    const int target = out.chosen.lane_sequence.back();
    const Lane * lane = road.lane_by_id(target);
    const bool settled = lane != nullptr && out.chosen.lane_sequence.size() == 1 &&
                         std::abs(ego.d - lane->d_center) <= config_.selection.settle_tolerance;
    if (!settled) {
      target_lane_ = target;
    }
  }

  out.metrics.maneuver_count = out.feasible_count();
  out.metrics.selected_id = out.selected >= 0 ? out.chosen.id : -1;
  out.metrics.route_count = static_cast<int>(dyn.routes.size());
  out.metrics.corridor_count = static_cast<int>(out.static_topology.corridors.size());
  out.metrics.emergency = out.selected < 0;
  return out;
}

}  // namespace mplan
