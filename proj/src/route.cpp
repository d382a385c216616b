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

#include "mplan/route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mplan/errors.hpp"

namespace mplan
{

namespace
{

constexpr double kEps = 1e-9;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

BaseProfile build_base_profile(
  double s0, double v0, const MobilityModel & mobility, double dt, int steps, int substeps)
{
  if (!(dt > 0.0) || steps < 1 || substeps < 1) {
    throw PlanningError("invalid base profile sampling");
  }
  BaseProfile base;
  const auto n = static_cast<std::size_t>(steps) + 1;
  base.lower.reserve(n);
  base.upper.reserve(n);
  base.v_lower.reserve(n);
  base.v_upper.reserve(n);

  const double h = dt / substeps;
  double sl = s0;
  double vl = std::max(0.0, v0);
  double su = s0;
  double vu = std::max(0.0, v0);
  for (int k = 0; k <= steps; ++k) {
    if (k > 0) {
      for (int i = 0; i < substeps; ++i) {
        // Braking bound, exact within the substep.
        if (vl > 0.0) {
          const double a = mobility.decel_of_v(vl);
          if (vl - a * h <= 0.0) {
            sl += vl * vl / (2.0 * a);
            vl = 0.0;
          } else {
            sl += vl * h - 0.5 * a * h * h;
            vl -= a * h;
          }
        }
        // Acceleration bound, capped at v_max.
        if (vu < mobility.v_max) {
          const double a = mobility.accel_of_v(vu);
          if (vu + a * h >= mobility.v_max) {
            const double t1 = (mobility.v_max - vu) / a;
            su += vu * t1 + 0.5 * a * t1 * t1 + mobility.v_max * (h - t1);
            vu = mobility.v_max;
          } else {
            su += vu * h + 0.5 * a * h * h;
            vu += a * h;
          }
        } else {
          su += vu * h;
        }
      }
    }
    base.lower.push_back(sl);
    base.upper.push_back(su);
    base.v_lower.push_back(vl);
    base.v_upper.push_back(vu);
  }
  return base;
}

double TrajectoryProfile::max_height() const
{
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_begin; k <= k_end; ++k) {
    best = std::max(best, upper[static_cast<std::size_t>(k)] - lower[static_cast<std::size_t>(k)]);
  }
  return best;
}

std::optional<std::pair<double, double>> profile_overlap(
  const TrajectoryProfile & p, const TrajectoryProfile & q, int k)
{
  if (!p.exists(k) || !q.exists(k)) {
    return std::nullopt;
  }
  const auto i = static_cast<std::size_t>(k);
  return std::make_pair(std::max(p.lower[i], q.lower[i]), std::min(p.upper[i], q.upper[i]));
}

bool ManeuverWindow::feasible() const
{
  return std::max(br, fr - te) <= std::min(bl, fl - te) + kEps;
}

ProfileSet generate_profiles(
  const BaseProfile & base, const Road & road, const VehicleState & ego,
  std::span<const PredictedTrajectory> vehicles, const RouteConfig & config)
{
  ProfileSet out;
  const std::size_t n = base.lower.size();
  const int ego_lane = road.lane_at(ego.d).id;
  const int ego_idx = road.lane_index(ego_lane);

  auto half_gap = [&](const PredictedTrajectory & v) {
    return 0.5 * (v.states.front().length + config.ego_length) + config.d_safe;
  };

  // Vehicles whose blocked band never meets the base profile are ignored.
  std::vector<const PredictedTrajectory *> relevant;
  for (const auto & v : vehicles) {
    const double h = half_gap(v);
    bool touches = false;
    for (std::size_t k = 0; k < n && k < v.states.size(); ++k) {
      const double s = v.states[k].s;
      if (s + h >= base.lower[k] && s - h <= base.upper[k]) {
        touches = true;
        break;
      }
    }
    if (touches) {
      relevant.push_back(&v);
    } else {
      out.dropped_vehicles.push_back(v.vehicle_id);
    }
  }

  for (int li : {ego_idx, ego_idx + 1, ego_idx - 1}) {
    if (li < 0 || li >= static_cast<int>(road.lanes.size())) {
      continue;
    }
    const int lane_id = road.lanes[static_cast<std::size_t>(li)].id;
    std::vector<const PredictedTrajectory *> members;
    for (const auto * v : relevant) {
      if (v->occupies(lane_id)) {
        members.push_back(v);
      }
    }
    std::sort(members.begin(), members.end(), [](const auto * a, const auto * b) {
      return a->states.front().s < b->states.front().s;
    });
    int behind_ego = 0;
    for (const auto * v : members) {
      behind_ego += v->states.front().s < ego.s ? 1 : 0;
    }

    for (int z = 0; z <= static_cast<int>(members.size()); ++z) {
      const PredictedTrajectory * rear = z > 0 ? members[static_cast<std::size_t>(z - 1)] : nullptr;
      const PredictedTrajectory * front =
        z < static_cast<int>(members.size()) ? members[static_cast<std::size_t>(z)] : nullptr;
      std::vector<double> lo(n);
      std::vector<double> hi(n);
      for (std::size_t k = 0; k < n; ++k) {
        lo[k] = base.lower[k];
        hi[k] = base.upper[k];
        if (rear != nullptr) {
          lo[k] = std::max(lo[k], rear->states[k].s + half_gap(*rear));
        }
        if (front != nullptr) {
          hi[k] = std::min(hi[k], front->states[k].s - half_gap(*front));
        }
      }

      const bool root_zone = lane_id == ego_lane && z == behind_ego;
      bool relaxed = false;
      if (root_zone && !(lo[0] <= ego.s + 1e-6 && ego.s <= hi[0] + 1e-6)) {
        // The ego already sits inside a vehicle's margin: keep the braking
        // region reachable until the zone opens up.
        for (std::size_t k = 0; k < n && (k == 0 || lo[k] > hi[k]); ++k) {
          lo[k] = base.lower[k];
          hi[k] = std::max(hi[k], lo[k]);
        }
        relaxed = true;
      }

      std::size_t k = 0;
      while (k < n) {
        while (k < n && lo[k] > hi[k] + kEps) {
          ++k;
        }
        if (k >= n) {
          break;
        }
        const std::size_t kb = k;
        while (k < n && lo[k] <= hi[k] + kEps) {
          ++k;
        }
        TrajectoryProfile p;
        p.lane_id = lane_id;
        p.zone = z;
        p.k_begin = static_cast<int>(kb);
        p.k_end = static_cast<int>(k - 1);
        p.lower.assign(n, kNaN);
        p.upper.assign(n, kNaN);
        for (std::size_t i = kb; i < k; ++i) {
          p.lower[i] = lo[i];
          p.upper[i] = std::max(lo[i], hi[i]);
        }
        p.rear_vehicle = rear != nullptr ? rear->vehicle_id : -1;
        p.front_vehicle = front != nullptr ? front->vehicle_id : -1;
        p.contains_ego = root_zone && kb == 0 && p.lower[0] <= ego.s + 1e-6 && ego.s <= p.upper[0] + 1e-6;
        const bool narrow = p.max_height() < config.ego_length + 2.0 * config.d_safe;
        if (p.contains_ego) {
          p.constrained = narrow || relaxed;
        } else if (narrow) {
          ++out.discarded_narrow;
          continue;
        }
        p.id = static_cast<int>(out.profiles.size());
        if (p.contains_ego) {
          out.root = p.id;
        }
        out.profiles.push_back(std::move(p));
      }
    }
  }
  if (out.root < 0) {
    throw PlanningError("root profile not found");
  }
  return out;
}

std::vector<Route> connect_profiles(
  const ProfileSet & set, const Road & road, const RouteConfig & config)
{
  std::vector<Route> routes;
  routes.push_back(Route{{set.root}, {}, true});
  std::size_t level_begin = 0;
  for (int depth = 2; depth <= config.max_chain; ++depth) {
    const std::size_t level_end = routes.size();
    for (std::size_t r = level_begin; r < level_end; ++r) {
      const std::vector<int> chain = routes[r].chain;
      const auto & tail = set.profiles[static_cast<std::size_t>(chain.back())];
      const int tail_idx = road.lane_index(tail.lane_id);
      for (const auto & p : set.profiles) {
        if (std::abs(road.lane_index(p.lane_id) - tail_idx) != 1) {
          continue;
        }
        if (std::find(chain.begin(), chain.end(), p.id) != chain.end()) {
          continue;
        }
        bool overlaps = false;
        for (int k = std::max(p.k_begin, tail.k_begin); k <= std::min(p.k_end, tail.k_end); ++k) {
          const auto ov = profile_overlap(tail, p, k);
          if (ov && ov->second - ov->first > config.window_min_overlap) {
            overlaps = true;
            break;
          }
        }
        if (!overlaps) {
          continue;
        }
        Route next;
        next.chain = chain;
        next.chain.push_back(p.id);
        routes.push_back(std::move(next));
      }
    }
    level_begin = level_end;
  }
  return routes;
}

void compute_maneuver_windows(
  Route & route, const ProfileSet & set, double dt, const RouteConfig & config)
{
  route.windows.clear();
  route.feasible = true;
  const double te = config.lane_change_duration;
  double earliest = 0.0;
  for (std::size_t i = 0; i + 1 < route.chain.size(); ++i) {
    const auto & p = set.profiles[static_cast<std::size_t>(route.chain[i])];
    const auto & q = set.profiles[static_cast<std::size_t>(route.chain[i + 1])];
    const int n = static_cast<int>(p.lower.size());
    std::vector<double> g(static_cast<std::size_t>(n), kNaN);
    for (int k = 0; k < n; ++k) {
      if (const auto ov = profile_overlap(p, q, k)) {
        g[static_cast<std::size_t>(k)] = ov->second - ov->first - config.window_min_overlap;
      }
    }
    auto positive = [&](int k) { return k >= 0 && k < n && g[static_cast<std::size_t>(k)] > 0.0; };
    // Crossing time between samples a and b = a + 1 where g changes sign.
    auto crossing = [&](int a) {
      const double ga = g[static_cast<std::size_t>(a)];
      const double gb = g[static_cast<std::size_t>(a + 1)];
      if (std::isnan(ga) || std::isnan(gb) || ga == gb) {
        return (positive(a) ? a : a + 1) * dt;
      }
      return (a + ga / (ga - gb)) * dt;
    };

    ManeuverWindow w;
    w.te = te;
    w.source = p.id;
    w.target = q.id;
    bool found = false;
    ManeuverWindow first_run{};
    bool have_first = false;
    int k = 0;
    while (k < n) {
      while (k < n && !positive(k)) {
        ++k;
      }
      if (k >= n) {
        break;
      }
      const int kb = k;
      while (k < n && positive(k)) {
        ++k;
      }
      const int ke = k - 1;
      const double start = kb > 0 ? crossing(kb - 1) : 0.0;
      const double end = ke + 1 < n ? crossing(ke) : ke * dt;
      const double begin = std::max(start, earliest);
      ManeuverWindow cand = w;
      cand.br = begin;
      cand.fr = begin;
      cand.bl = end;
      cand.fl = end;
      if (!have_first) {
        first_run = cand;
        have_first = true;
      }
      if (cand.feasible()) {
        w = cand;
        found = true;
        break;
      }
    }
    if (!found) {
      if (have_first) {
        w = first_run;
      } else {
        w.br = w.fr = earliest;
        w.bl = w.fl = earliest - kEps * 10.0 - te;
      }
      route.feasible = false;
    }
    earliest = w.br + te;
    route.windows.push_back(w);
  }
}

DynamicTopology build_dynamic_topology(
  const Road & road, const VehicleState & ego, std::span<const PredictedTrajectory> vehicles,
  const MobilityModel & mobility, double dt, int steps, const RouteConfig & config)
{
  DynamicTopology topo;
  topo.base = build_base_profile(ego.s, ego.v, mobility, dt, steps, config.integration_substeps);
  topo.profiles = generate_profiles(topo.base, road, ego, vehicles, config);
  topo.routes = connect_profiles(topo.profiles, road, config);
  for (auto & r : topo.routes) {
    compute_maneuver_windows(r, topo.profiles, dt, config);
  }
  return topo;
}

std::vector<int> route_lanes(const Route & route, const ProfileSet & set)
{
  std::vector<int> lanes;
  lanes.reserve(route.chain.size());
  for (int id : route.chain) {
    lanes.push_back(set.profiles[static_cast<std::size_t>(id)].lane_id);
  }
  return lanes;
}

}  // namespace mplan
