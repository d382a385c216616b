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

#include "mplan/maneuver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

namespace mplan
{

namespace
{

std::string maneuver_key(const std::vector<int> & lanes, const TrajectoryProfile & end)
{
  std::string key;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    key += (i == 0 ? "" : ">") + std::to_string(lanes[i]);
  }
  // Within a lane the gap is identified by the vehicle in front of it; the
  // rear one may enter or leave the prediction without changing the choice.
  return fmt::format("{}|f{}", key, end.front_vehicle);
}

}  // namespace

std::vector<Maneuver> group_maneuvers(
  std::span<const Corridor> corridors, std::span<const Route> routes, const ProfileSet & profiles)
{
  std::vector<Maneuver> out;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto seq = route_lanes(routes[r], profiles);
    const std::set<int> lane_set(seq.begin(), seq.end());
    const std::vector<int> lanes(lane_set.begin(), lane_set.end());
    // Corridors over exactly the route's lanes; when there are none (corridors
    // only run to terminal bands, so an open road offers no corridor for a
    // partial lane change) the ones over the fewest extra lanes.
    auto covers = [&](const Corridor & c) {
      return std::includes(
        c.involved_lanes.begin(), c.involved_lanes.end(), lanes.begin(), lanes.end());
    };
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto & c : corridors) {
      if (covers(c)) {
        best = std::min(best, c.involved_lanes.size());
      }
    }
    for (std::size_t c = 0; c < corridors.size(); ++c) {
      if (!covers(corridors[c]) || corridors[c].involved_lanes.size() != best) {
        continue;
      }
      Maneuver m;
      m.id = static_cast<int>(out.size());
      m.corridor_index = static_cast<int>(c);
      m.route_index = static_cast<int>(r);
      m.corridor = corridors[c];
      m.route = routes[r];
      m.windows = routes[r].windows;
      m.involved_lanes = lanes;
      m.lane_sequence = seq;
      m.key = maneuver_key(seq, profiles.profiles[static_cast<std::size_t>(routes[r].chain.back())]);
      if (!routes[r].feasible) {
        m.feasible = false;
        m.rejection = "empty maneuver window";
      }
      out.push_back(std::move(m));
    }
  }
  // Several corridors over the same lanes give the same key; disambiguate.
  std::set<std::string> seen;
  for (auto & m : out) {
    std::string key = m.key;
    for (int n = 1; seen.count(key); ++n) {
      key = fmt::format("{}#{}", m.key, n);
    }
    m.key = key;
    seen.insert(key);
  }
  return out;
}

double lane_coverage_end(const Corridor & corridor, const Lane & lane)
{
  for (std::size_t i = 0; i < corridor.d_lower.size(); ++i) {
    if (!(corridor.d_lower[i] <= lane.d_center && lane.d_center <= corridor.d_upper[i])) {
      return corridor.s0 + static_cast<double>(i) * corridor.step;
    }
  }
  return corridor.blocked ? corridor.s_end() : std::numeric_limits<double>::infinity();
}

void truncate_windows(
  Maneuver & maneuver, const Road & road, const ProfileSet & profiles, double dt,
  double ego_length)
{
  const auto & chain = maneuver.route.chain;
  for (std::size_t i = 0; i < maneuver.windows.size(); ++i) {
    auto & w = maneuver.windows[i];
    const auto & p = profiles.profiles[static_cast<std::size_t>(chain[i])];
    const auto & q = profiles.profiles[static_cast<std::size_t>(chain[i + 1])];
    const Lane * source = road.lane_by_id(p.lane_id);
    const double s_cov = lane_coverage_end(maneuver.corridor, *source);
    if (!std::isfinite(s_cov)) {
      continue;
    }
    // Rear bound of the usable region in the source lane: the overlap when
    // it exists, else the source profile itself.
    auto rear = [&](int k) -> std::optional<double> {
      if (const auto ov = profile_overlap(p, q, k)) {
        return ov->first;
      }
      if (p.exists(k)) {
        return p.lower[static_cast<std::size_t>(k)];
      }
      return std::nullopt;
    };
    const int n = static_cast<int>(p.lower.size());
    double t_clip = std::numeric_limits<double>::infinity();
    bool has_prev = false;
    double gp = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto cur = rear(k);
      if (!cur) {
        has_prev = false;
        continue;
      }
      const double g = *cur + 0.5 * ego_length - s_cov;
      if (g >= 0.0) {
        t_clip = has_prev ? (k - 1 + gp / (gp - g)) * dt : k * dt;
        break;
      }
      has_prev = true;
      gp = g;
    }
    w.bl = std::min(w.bl, t_clip);
    w.fl = std::min(w.fl, t_clip);
    if (!w.feasible()) {
      maneuver.feasible = false;
      if (maneuver.rejection.empty()) {
        maneuver.rejection = "static collision before the lane change completes";
      }
    }
  }
}

CollisionReport check_collision(
  const Trajectory & trajectory, std::span<const PredictedTrajectory> vehicles, const Road & road,
  const CostMap & cost_map, double ego_length, double ego_width)
{
  CollisionReport rep;
  const double res = cost_map.resolution();
  const int ns = std::max(1, static_cast<int>(std::ceil(ego_length / res)));
  const int nd = std::max(1, static_cast<int>(std::ceil(ego_width / res)));
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double s = trajectory.s[k];
    const double d = trajectory.d[k];
    for (const auto & v : vehicles) {
      if (k >= v.states.size()) {
        continue;
      }
      const auto & st = v.states[k];
      const double lat = std::abs(d - st.d) - 0.5 * (ego_width + st.width);
      const double lon = std::abs(s - st.s) - 0.5 * (ego_length + st.length);
      if (lat < 0.0) {
        rep.min_gap = std::min(rep.min_gap, lon);
      }
      if (lat < 0.0 && lon < 0.0 && !rep.collides) {
        rep.collides = true;
        rep.step = static_cast<int>(k);
        rep.reason = fmt::format("vehicle {} at step {}", v.vehicle_id, k);
      }
    }
    if (rep.collides) {
      continue;
    }
    for (int a = 0; a <= ns && !rep.collides; ++a) {
      const double sa = std::clamp(
        s - 0.5 * ego_length + ego_length * a / ns, 0.0, road.reference.length());
      const Vec2 foot = road.reference.to_cartesian(sa, 0.0);
      const Vec2 nrm = road.reference.normal_at(sa);
      for (int b = 0; b <= nd; ++b) {
        const double db = d - 0.5 * ego_width + ego_width * b / nd;
        if (cost_map.is_lethal(foot + nrm * db)) {
          rep.collides = true;
          rep.step = static_cast<int>(k);
          rep.reason = fmt::format("static obstacle at step {}", k);
          break;
        }
      }
    }
  }
  return rep;
}

CostBreakdown score_maneuver(
  const Maneuver & maneuver, const Road & road, double min_gap, const MobilityModel & mobility,
  const SelectionConfig & config)
{
  CostBreakdown c;
  const auto & traj = maneuver.result->trajectory;
  const double horizon = traj.duration();
  const auto ds = forward_differences(traj.s, traj.dt);
  const auto dd = forward_differences(traj.d, traj.dt);
  double comfort = 0.0;
  for (double j : ds.jerk) {
    comfort += j * j;
  }
  for (double j : dd.jerk) {
    comfort += j * j;
  }
  for (double a : dd.a) {
    comfort += a * a;
  }
  c.comfort = comfort * traj.dt / horizon;

  double safety = 1.0 / (1.0 + std::max(0.0, std::isfinite(min_gap) ? min_gap : 1e6));
  for (const auto & w : maneuver.windows) {
    const double slack = std::max(0.0, (w.bl - w.br) - w.te);
    safety += 1.0 / (1.0 + slack);
  }
  c.safety = safety;

  const double progress = traj.s.back() - traj.s.front();
  const double v_end = ds.v.empty() ? 0.0 : std::max(0.0, ds.v.back());
  const bool stop = maneuver.result->limits.stop;
  c.efficiency = (1.0 - progress / (mobility.v_max * horizon)) + (1.0 - v_end / mobility.v_max) +
                 (stop ? config.stop_penalty : 0.0);

  if (!stop && !road.lanes.empty() && maneuver.lane_sequence.back() == road.lanes.front().id) {
    c.bonus += config.drive_lane_bonus;
  }
  c.bonus += config.persistence_bonus * std::min(maneuver.age, config.max_age);

  c.total = config.comfort_weight * c.comfort + config.safety_weight * c.safety +
            config.efficiency_weight * c.efficiency - c.bonus;
  return c;
}

int select_maneuver(std::span<const Maneuver> maneuvers)
{
  int best = -1;
  for (std::size_t i = 0; i < maneuvers.size(); ++i) {
    const auto & m = maneuvers[i];
    if (!m.feasible || !m.result) {
      continue;
    }
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto & b = maneuvers[static_cast<std::size_t>(best)];
    const double diff = m.cost.total - b.cost.total;
    const double tol = 1e-12 * std::max({1.0, std::abs(m.cost.total), std::abs(b.cost.total)});
    if (diff < -tol) {
      best = static_cast<int>(i);
    } else if (std::abs(diff) <= tol && m.lane_changes() < b.lane_changes()) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

Maneuver emergency_stop(const VehicleState & ego, const BaseProfile & base, double dt)
{
  Maneuver m;
  m.id = -1;
  m.key = "emergency";
  m.emergency = true;
  m.lane_sequence = {ego.lane_id};
  m.involved_lanes = {ego.lane_id};
  OptimizationResult r;
  r.trajectory.dt = dt;
  r.trajectory.s = base.lower;
  r.trajectory.d.assign(base.lower.size(), ego.d);
  r.limits.stop = true;
  m.result = std::move(r);
  return m;
}

}  // namespace mplan
