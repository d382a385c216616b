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

#include "mplan/simulation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace mplan
{

namespace
{

/// Follows a plan by integrating its forward-difference velocities, read as
/// node velocities starting from the current speed. Replanning faster than
/// the plan's step then still executes the planned acceleration.
class TrajectoryFollower
{
public:
  TrajectoryFollower(
    const Trajectory & traj, double v0_s, double v0_d, double s0, double d0,
    const MobilityModel & mobility)
  : dt_(traj.dt), s0_(s0), d0_(d0)
  {
    vs_ = node_rates(traj.s, v0_s);
    vd_ = node_rates(traj.d, v0_d);
    // Actuator saturation: longitudinal speed changes stay within the
    // acceleration and braking capability.
    for (std::size_t k = 0; k + 1 < vs_.size(); ++k) {
      const double v = std::max(0.0, vs_[k]);
      vs_[k + 1] = std::clamp(
        vs_[k + 1], std::max(0.0, v - mobility.decel_of_v(v) * dt_), v + mobility.accel_of_v(v) * dt_);
    }
  }

  struct Sample
  {
    double x{0.0};
    double v{0.0};
    double a{0.0};
  };

  Sample s_at(double tau) const { return eval(s0_, vs_, tau); }
  Sample d_at(double tau) const { return eval(d0_, vd_, tau); }

private:
  std::vector<double> node_rates(const std::vector<double> & x, double v0) const
  {
    const std::size_t n = x.size();
    std::vector<double> u(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      u[k] = (x[k + 1] - x[k]) / dt_;
    }
    u[n - 1] = u[n - 2];
    u[0] = v0;
    return u;
  }

  Sample eval(double x0, const std::vector<double> & u, double tau) const
  {
    double x = x0;
    const std::size_t last = u.size() - 1;
    for (std::size_t k = 0; k < last; ++k) {
      const double t0 = dt_ * static_cast<double>(k);
      const double slope = (u[k + 1] - u[k]) / dt_;
      if (tau <= t0 + dt_) {
        const double h = tau - t0;
        const double v = u[k] + slope * h;
        return {x + 0.5 * (u[k] + v) * h, v, slope};
      }
      x += 0.5 * (u[k] + u[k + 1]) * dt_;
    }
    const double h = tau - dt_ * static_cast<double>(last);
    return {x + u[last] * h, u[last], 0.0};
  }

  double dt_;
  double s0_;
  double d0_;
  std::vector<double> vs_;
  std::vector<double> vd_;
};

bool segments_intersect(const Vec2 & p1, const Vec2 & p2, const Vec2 & q1, const Vec2 & q2)
{
  auto orient = [](const Vec2 & a, const Vec2 & b, const Vec2 & c) {
    const double v = (b - a).cross(c - a);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_segment = [](const Vec2 & a, const Vec2 & b, const Vec2 & p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) {
    return true;
  }
  return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
         (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

}  // namespace

Polygon footprint(const ActorPose & pose)
{
  const Vec2 c{pose.x, pose.y};
  const Vec2 t{std::cos(pose.heading), std::sin(pose.heading)};
  const Vec2 n{-t.y, t.x};
  const double hl = 0.5 * pose.length;
  const double hw = 0.5 * pose.width;
  return {c + t * hl - n * hw, c + t * hl + n * hw, c - t * hl + n * hw, c - t * hl - n * hw};
}

ActorPose make_pose(
  const Road & road, int id, double s, double d, double v_s, double v_d, double length,
  double width)
{
  ActorPose p;
  p.id = id;
  p.s = s;
  p.d = d;
  const Vec2 xy = road.reference.to_cartesian(s, d);
  p.x = xy.x;
  p.y = xy.y;
  const Vec2 tan = road.reference.tangent_at(s);
  const double drift = (std::abs(v_s) > 1e-3) ? std::atan2(v_d, v_s) : 0.0;
  p.heading = std::atan2(tan.y, tan.x) + drift;
  p.length = length;
  p.width = width;
  return p;
}

bool polygons_overlap(const Polygon & a, const Polygon & b)
{
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2 & a1 = a[i];
    const Vec2 & a2 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a1, a2, b[j], b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  return point_in_polygon(a.front(), b) || point_in_polygon(b.front(), a);
}

SimulationResult run_simulation(const Scenario & scenario, const SimulationOptions & options)
{
  SimulationResult out;
  const Road & road = scenario.road;
  const double h = scenario.run.sim_step;
  const int total = static_cast<int>(std::llround(scenario.run.duration / h));
  const int replan_every =
    std::max(1, static_cast<int>(std::llround(options.replan_period / h)));

  Planner planner(scenario.planner);
  VehicleState ego = scenario.ego;
  double ego_vd = scenario.ego_lateral_velocity;
  double ego_a = 0.0;
  std::optional<TrajectoryFollower> follower;
  double t_plan = 0.0;
  double prev_a = 0.0;
  const double road_end = road.reference.length() - planner.static_horizon();

  for (int j = 0; j <= total; ++j) {
    const double t = j * h;
    if (follower) {
      const auto ss = follower->s_at(t - t_plan);
      const auto dd = follower->d_at(t - t_plan);
      ego.s = ss.x;
      ego.v = std::max(0.0, ss.v);
      ego_a = ss.a;
      ego.d = dd.x;
      ego_vd = dd.v;
      ego.lane_id = road.lane_at(ego.d).id;
    }

    std::vector<VehicleObservation> observed;
    observed.reserve(scenario.vehicles.size());
    TraceSample sample;
    sample.t = t;
    sample.ego = make_pose(road, 0, ego.s, ego.d, ego.v, ego_vd, ego.length, ego.width);
    sample.v = ego.v;
    sample.a = ego_a;
    sample.jerk = j == 0 ? 0.0 : (ego_a - prev_a) / h;
    prev_a = ego_a;
    for (const auto & script : scenario.vehicles) {
      const auto o = script.observe(t, road);
      observed.push_back(o);
      sample.actors.push_back(make_pose(
        road, o.id, o.state.s, o.state.d, o.state.v, o.lateral_velocity, o.state.length,
        o.state.width));
    }

    const Polygon ego_poly = footprint(sample.ego);
    for (std::size_t i = 0; i < scenario.obstacles.size() && !out.collision; ++i) {
      if (polygons_overlap(ego_poly, scenario.obstacles[i])) {
        out.collision = true;
        out.collision_reason = fmt::format("obstacle {}", i);
      }
    }
    for (const auto & a : sample.actors) {
      if (!out.collision && polygons_overlap(ego_poly, footprint(a))) {
        out.collision = true;
        out.collision_reason = fmt::format("vehicle {}", a.id);
      }
    }
    out.trace.push_back(std::move(sample));
    if (out.collision) {
      out.collision_time = t;
      spdlog::error("collision at t={:.2f}s with {}", t, out.collision_reason);
      break;
    }
    if (j == total) {
      break;
    }
    if (ego.s >= road_end) {
      out.reached_road_end = true;
      spdlog::info("ego reached the end of the mapped road at t={:.2f}s", t);
      break;
    }

    if (j % replan_every == 0) {
      PlanningInput in;
      in.road = &road;
      in.obstacles = scenario.obstacles;
      in.ego = ego;
      in.ego_lateral_velocity = ego_vd;
      in.vehicles = observed;
      in.mobility = scenario.mobility;
      in.v_sig = scenario.v_sig;
      auto res = planner.plan(in);
      res.metrics.cycle = static_cast<int>(out.cycles.size());
      res.metrics.time = t;
      if (res.metrics.emergency) {
        ++out.emergency_cycles;
      }
      spdlog::debug(
        "cycle {} t={:.2f} maneuvers={} selected={} static={:.2f}ms dynamic={:.2f}ms opt={:.2f}ms",
        res.metrics.cycle, t, res.metrics.maneuver_count, res.metrics.selected_id,
        res.metrics.t_static_topology, res.metrics.t_dynamic_topology, res.metrics.t_optimization);
      if (options.on_cycle) {
        options.on_cycle(in, res);
      }
      out.cycles.push_back(res.metrics);
      out.selected_lanes.push_back(res.chosen.lane_sequence);
      follower.emplace(*res.chosen.trajectory(), ego.v, ego_vd, ego.s, ego.d, scenario.mobility);
      t_plan = t;
    }
  }
  return out;
}

}  // namespace mplan
