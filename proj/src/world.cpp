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

#include "mplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mplan/errors.hpp"

namespace mplan
{

const Lane * Road::lane_by_id(int id) const
{
  for (const auto & lane : lanes) {
    if (lane.id == id) {
      return &lane;
    }
  }
  return nullptr;
}

int Road::lane_index(int id) const
{
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    if (lanes[i].id == id) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

const Lane & Road::lane_at(double d) const
{
  if (lanes.empty()) {
    throw PlanningError("road has no lanes");
  }
  const Lane * best = &lanes.front();
  double best_dist = std::abs(d - best->d_center);
  for (const auto & lane : lanes) {
    if (lane.contains(d)) {
      return lane;
    }
    const double dist = std::abs(d - lane.d_center);
    if (dist < best_dist) {
      best = &lane;
      best_dist = dist;
    }
  }
  return *best;
}

ReferencePath Road::lane_line(int lane_id, bool left) const
{
  const Lane * lane = lane_by_id(lane_id);
  if (lane == nullptr) {
    throw PlanningError("unknown lane id");
  }
  return reference.offset(left ? lane->d_left() : lane->d_right());
}

bool PredictedTrajectory::occupies(int lane_id) const
{
  for (const auto & step : occupied_lanes) {
    if (std::find(step.begin(), step.end(), lane_id) != step.end()) {
      return true;
    }
  }
  return false;
}

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots)
: knots_(std::move(knots))
{
  if (knots_.empty()) {
    throw PlanningError("piecewise-linear map needs at least one knot");
  }
  std::sort(knots_.begin(), knots_.end());
}

double PiecewiseLinear::operator()(double x) const
{
  if (x <= knots_.front().first) {
    return knots_.front().second;
  }
  if (x >= knots_.back().first) {
    return knots_.back().second;
  }
  auto hi = std::upper_bound(
    knots_.begin(), knots_.end(), x,
    [](double v, const std::pair<double, double> & k) { return v < k.first; });
  auto lo = hi - 1;
  const double t = (x - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

void MobilityModel::validate() const
{
  auto positive_on_range = [&](const PiecewiseLinear & f) {
    if (f(0.0) <= 0.0 || f(v_max) <= 0.0) {
      return false;
    }
    for (const auto & [v, a] : f.knots()) {
      if (v >= 0.0 && v <= v_max && a <= 0.0) {
        return false;
      }
    }
    return true;
  };
  if (!positive_on_range(decel_of_v) || !positive_on_range(accel_of_v)) {
    throw PlanningError("mobility bounds must be positive on [0, v_max]");
  }
  if (!(v_max > 0.0) || !(a_cen > 0.0) || a_dec < 0.0) {
    throw PlanningError("invalid mobility limits");
  }
}

std::vector<int> occupied_lanes(const Road & road, double d, double width)
{
  std::vector<int> out;
  const double lo = d - 0.5 * width;
  const double hi = d + 0.5 * width;
  for (const auto & lane : road.lanes) {
    if (hi > lane.d_right() && lo < lane.d_left()) {
      out.push_back(lane.id);
    }
  }
  if (out.empty()) {
    out.push_back(road.lane_at(d).id);
  }
  if (out.size() > 2) {
    // A footprint narrower than a lane touches at most two lanes; keep the
    // lanes nearest the center.
    const int center = road.lane_at(d).id;
    std::vector<int> trimmed{center};
    const int idx = road.lane_index(center);
    const double left_gap = std::abs(hi - road.lanes[static_cast<std::size_t>(idx)].d_left());
    const double right_gap = std::abs(road.lanes[static_cast<std::size_t>(idx)].d_right() - lo);
    const int other = left_gap > right_gap ? idx + 1 : idx - 1;
    if (other >= 0 && other < static_cast<int>(road.lanes.size())) {
      trimmed.push_back(road.lanes[static_cast<std::size_t>(other)].id);
    }
    out = trimmed;
  }
  return out;
}

std::vector<PredictedTrajectory> predict_trajectories(
  std::span<const VehicleObservation> vehicles, const Road & road, double ego_s, double dt,
  int steps)
{
  std::vector<PredictedTrajectory> out;
  out.reserve(vehicles.size());
  for (const auto & obs : vehicles) {
    PredictedTrajectory traj;
    traj.vehicle_id = obs.id;
    const bool front = obs.state.s > ego_s;
    const double accel = (front && obs.accel > 0.0) ? 0.0 : obs.accel;
    const double v0 = std::max(0.0, obs.state.v);
    // Time at which the speed reaches zero under braking.
    const double t_stop = accel < 0.0 ? v0 / -accel : std::numeric_limits<double>::infinity();

    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.occupied_lanes.reserve(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
      const double t = k * dt;
      const double te = std::min(t, t_stop);
      VehicleState st = obs.state;
      st.s = obs.state.s + v0 * te + 0.5 * accel * te * te;
      st.v = std::max(0.0, v0 + accel * te);
      st.d = std::clamp(
        obs.state.d + obs.lateral_velocity * t, road.d_min() + 0.5 * st.width,
        road.d_max() - 0.5 * st.width);
      st.lane_id = road.lane_at(st.d).id;
      traj.states.push_back(st);
      traj.occupied_lanes.push_back(occupied_lanes(road, st.d, st.width));
    }
    out.push_back(std::move(traj));
  }
  return out;
}

void classify_reference_vehicles(std::span<PredictedTrajectory> vehicles, double ego_s)
{
  std::map<int, std::pair<int, int>> best;  // lane -> (nearest front idx, nearest rear idx)
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    vehicles[i].is_reference = false;
    const auto & st = vehicles[i].states.front();
    auto [it, inserted] = best.try_emplace(st.lane_id, -1, -1);
    auto & [front, rear] = it->second;
    if (st.s > ego_s) {
      if (front < 0 || st.s < vehicles[static_cast<std::size_t>(front)].states.front().s) {
        front = static_cast<int>(i);
      }
    } else {
      if (rear < 0 || st.s > vehicles[static_cast<std::size_t>(rear)].states.front().s) {
        rear = static_cast<int>(i);
      }
    }
  }
  for (const auto & [lane, pick] : best) {
    const int ref = pick.first >= 0 ? pick.first : pick.second;
    if (ref >= 0) {
      vehicles[static_cast<std::size_t>(ref)].is_reference = true;
    }
  }
}

namespace
{

void refresh_speeds(PredictedTrajectory & traj, double dt)
{
  auto & st = traj.states;
  for (std::size_t k = 0; k + 1 < st.size(); ++k) {
    st[k].v = std::max(0.0, (st[k + 1].s - st[k].s) / dt);
  }
  if (st.size() >= 2) {
    st.back().v = st[st.size() - 2].v;
  }
}

// Keeps `follower` behind `leader` (leader_is_ahead) or ahead of it.
void separate(
  const PredictedTrajectory & anchor, PredictedTrajectory & other, bool other_behind, double dt,
  double d_safe, double cap_ratio)
{
  const std::size_t n = std::min(anchor.states.size(), other.states.size());
  const double front_length =
    other_behind ? anchor.states.front().length : other.states.front().length;
  const double gap = front_length + d_safe;

  bool crosses = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double rel = other.states[k].s - anchor.states[k].s;
    if (other_behind ? rel > -front_length : rel < front_length) {
      crosses = true;
      break;
    }
  }
  if (!crosses) {
    return;
  }

  const double cap = cap_ratio * other.states.front().length;
  for (std::size_t k = 0; k < n; ++k) {
    double & s = other.states[k].s;
    const double bound = other_behind ? anchor.states[k].s - gap : anchor.states[k].s + gap;
    const double shift = other_behind ? s - bound : bound - s;
    if (shift <= 0.0) {
      continue;
    }
    s = bound;
    if (shift > cap && !other.cap_exceeded_at) {
      other.cap_exceeded_at = static_cast<int>(k);
    }
  }
  other.adjusted = true;
  refresh_speeds(other, dt);
}

}  // namespace

void adjust_non_reference_trajectories(
  std::span<PredictedTrajectory> vehicles, double dt, double d_safe, double cap_ratio)
{
  std::map<int, std::vector<std::size_t>> by_lane;
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    by_lane[vehicles[i].lane_id()].push_back(i);
  }
  for (auto & [lane, members] : by_lane) {
    auto ref_it = std::find_if(members.begin(), members.end(), [&](std::size_t i) {
      return vehicles[i].is_reference;
    });
    if (ref_it == members.end()) {
      continue;
    }
    const std::size_t ref = *ref_it;
    const double ref_s = vehicles[ref].states.front().s;

    std::vector<std::size_t> behind;
    std::vector<std::size_t> ahead;
    for (std::size_t i : members) {
      if (i == ref) {
        continue;
      }
      (vehicles[i].states.front().s <= ref_s ? behind : ahead).push_back(i);
    }
    std::sort(behind.begin(), behind.end(), [&](std::size_t a, std::size_t b) {
      return vehicles[a].states.front().s > vehicles[b].states.front().s;
    });
    std::sort(ahead.begin(), ahead.end(), [&](std::size_t a, std::size_t b) {
      return vehicles[a].states.front().s < vehicles[b].states.front().s;
    });

    std::size_t prev = ref;
    for (std::size_t i : behind) {
      separate(vehicles[prev], vehicles[i], true, dt, d_safe, cap_ratio);
      prev = i;
    }
    prev = ref;
    for (std::size_t i : ahead) {
      separate(vehicles[prev], vehicles[i], false, dt, d_safe, cap_ratio);
      prev = i;
    }
  }
}

}  // namespace mplan
