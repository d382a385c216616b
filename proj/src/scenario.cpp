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

#include "mplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mplan/errors.hpp"

namespace mplan
{

namespace
{

using json = nlohmann::json;

constexpr double kKmh = 1.0 / 3.6;

/// Validating view of one JSON object; every accessor reports its full path.
class Node
{
public:
  Node(const json & j, std::string path, std::initializer_list<std::string_view> allowed)
  : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ScenarioError(path_.empty() ? "<root>" : path_, "expected an object");
    }
    for (const auto & [key, value] : j_.items()) {
      (void)value;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ScenarioError(field(key), "unknown field");
      }
    }
  }

  std::string field(std::string_view key) const
  {
    return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
  }
  bool has(std::string_view key) const { return j_.contains(key); }
  const json & raw(std::string_view key) const
  {
    if (!has(key)) {
      throw ScenarioError(field(key), "missing required field");
    }
    return j_.at(std::string(key));
  }

  double number(std::string_view key) const
  {
    const auto & v = raw(key);
    if (!v.is_number()) {
      throw ScenarioError(field(key), "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      throw ScenarioError(field(key), "must be finite");
    }
    return x;
  }
  double number(std::string_view key, double fallback) const
  {
    return has(key) ? number(key) : fallback;
  }
  double positive(std::string_view key, double fallback) const
  {
    const double x = number(key, fallback);
    if (x <= 0.0) {
      throw ScenarioError(field(key), "must be positive");
    }
    return x;
  }
  double positive(std::string_view key) const
  {
    const double x = number(key);
    if (x <= 0.0) {
      throw ScenarioError(field(key), "must be positive");
    }
    return x;
  }
  int integer(std::string_view key) const
  {
    const auto & v = raw(key);
    if (!v.is_number_integer()) {
      throw ScenarioError(field(key), "expected an integer");
    }
    return v.get<int>();
  }
  int integer(std::string_view key, int fallback) const { return has(key) ? integer(key) : fallback; }
  std::string string(std::string_view key) const
  {
    const auto & v = raw(key);
    if (!v.is_string()) {
      throw ScenarioError(field(key), "expected a string");
    }
    return v.get<std::string>();
  }

  /// Speed given either as `key` [m/s] or `key_kmh` [km/h].
  std::optional<double> speed(std::string_view key) const
  {
    const std::string kmh = std::string(key) + "_kmh";
    if (has(key) && has(kmh)) {
      throw ScenarioError(field(kmh), fmt::format("conflicts with '{}'", key));
    }
    std::optional<double> v;
    if (has(key)) {
      v = number(key);
    } else if (has(kmh)) {
      v = number(kmh) * kKmh;
    }
    if (v && *v < 0.0) {
      throw ScenarioError(field(has(key) ? key : std::string_view(kmh)), "must be non-negative");
    }
    return v;
  }
  double speed(std::string_view key, double fallback) const { return speed(key).value_or(fallback); }

  const json & array(std::string_view key) const
  {
    const auto & v = raw(key);
    if (!v.is_array()) {
      throw ScenarioError(field(key), "expected an array");
    }
    return v;
  }

private:
  const json & j_;
  std::string path_;
};

Vec2 parse_point(const json & j, const std::string & path)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ScenarioError(path, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> parse_polyline(const json & j, const std::string & path, std::size_t min_points)
{
  if (!j.is_array()) {
    throw ScenarioError(path, "expected an array of points");
  }
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_point(j[i], fmt::format("{}[{}]", path, i)));
  }
  if (out.size() < min_points) {
    throw ScenarioError(path, fmt::format("needs at least {} points", min_points));
  }
  return out;
}

PiecewiseLinear parse_bound(const json & j, const std::string & path)
{
  if (j.is_number()) {
    return PiecewiseLinear::constant(j.get<double>());
  }
  if (!j.is_array() || j.empty()) {
    throw ScenarioError(path, "expected a number or [[v, value], ...]");
  }
  std::vector<std::pair<double, double>> knots;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = parse_point(j[i], fmt::format("{}[{}]", path, i));
    knots.emplace_back(p.x, p.y);
  }
  return PiecewiseLinear(std::move(knots));
}

Road parse_road(const json & root)
{
  Node road_node(root.at("road"), "road", {"reference", "interval", "lanes"});
  const auto polyline = parse_polyline(road_node.raw("reference"), "road.reference", 2);
  const double interval = road_node.positive("interval", ReferencePath::kDefaultInterval);
  Road road{ReferencePath::build(polyline, interval), {}};

  const auto & lanes = road_node.array("lanes");
  if (lanes.empty()) {
    throw ScenarioError("road.lanes", "needs at least one lane");
  }
  std::set<int> ids;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string path = fmt::format("road.lanes[{}]", i);
    Node n(lanes[i], path, {"id", "width", "offset", "centerline"});
    Lane lane;
    lane.id = n.integer("id");
    if (!ids.insert(lane.id).second) {
      throw ScenarioError(n.field("id"), "duplicate lane id");
    }
    lane.width = n.positive("width");
    if (n.has("offset") == n.has("centerline")) {
      throw ScenarioError(path, "exactly one of 'offset' or 'centerline' is required");
    }
    if (n.has("offset")) {
      lane.d_center = n.number("offset");
    } else {
      const auto pts = parse_polyline(n.raw("centerline"), n.field("centerline"), 1);
      std::vector<double> ds;
      for (const auto & p : pts) {
        ds.push_back(road.reference.to_frenet(p).d);
      }
      std::nth_element(ds.begin(), ds.begin() + static_cast<long>(ds.size() / 2), ds.end());
      lane.d_center = ds[ds.size() / 2];
    }
    road.lanes.push_back(lane);
  }
  std::sort(road.lanes.begin(), road.lanes.end(), [](const Lane & a, const Lane & b) {
    return a.d_center < b.d_center;
  });
  for (std::size_t i = 1; i < road.lanes.size(); ++i) {
    if (road.lanes[i].d_right() < road.lanes[i - 1].d_left() - 1e-6) {
      throw ScenarioError("road.lanes", fmt::format(
        "lanes {} and {} overlap", road.lanes[i - 1].id, road.lanes[i].id));
    }
  }
  return road;
}

void check_on_road(const Road & road, double d, const std::string & path)
{
  if (d < road.d_min() || d > road.d_max()) {
    throw ScenarioError(path, "outside every lane");
  }
}

VehicleScript parse_vehicle(const json & j, const std::string & path, const Road & road)
{
  Node n(j, path, {"id", "s", "d", "v", "v_kmh", "length", "width", "motion"});
  VehicleScript v;
  v.id = n.integer("id");
  v.initial.s = n.number("s");
  v.initial.d = n.number("d");
  check_on_road(road, v.initial.d, n.field("d"));
  v.initial.v = n.speed("v").value_or(0.0);
  if (!n.speed("v")) {
    throw ScenarioError(n.field("v"), "missing required field");
  }
  v.initial.length = n.positive("length", 4.5);
  v.initial.width = n.positive("width", 1.8);
  v.initial.lane_id = road.lane_at(v.initial.d).id;
  if (!n.has("motion")) {
    return v;
  }
  const auto & mj = n.raw("motion");
  const std::string mpath = n.field("motion");
  if (!mj.is_object() || !mj.contains("type")) {
    throw ScenarioError(mpath + ".type", "missing required field");
  }
  const std::string type = Node(mj, mpath, {"type", "accel", "speed_cap", "speed_cap_kmh",
                                            "points"}).string("type");
  if (type == "constant_speed") {
    Node m(mj, mpath, {"type"});
    v.motion = MotionType::kConstantSpeed;
  } else if (type == "constant_accel") {
    Node m(mj, mpath, {"type", "accel", "speed_cap", "speed_cap_kmh"});
    v.motion = MotionType::kConstantAccel;
    v.accel = m.number("accel");
    v.speed_cap = m.speed("speed_cap", 1e9);
  } else if (type == "waypoints") {
    Node m(mj, mpath, {"type", "points"});
    v.motion = MotionType::kWaypoints;
    const auto & pts = m.array("points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string ppath = fmt::format("{}.points[{}]", mpath, i);
      Node p(pts[i], ppath, {"t", "s", "d"});
      Waypoint w{p.number("t"), p.number("s"), p.number("d")};
      check_on_road(road, w.d, p.field("d"));
      if (!v.waypoints.empty() && w.t <= v.waypoints.back().t) {
        throw ScenarioError(p.field("t"), "waypoint times must increase");
      }
      v.waypoints.push_back(w);
    }
    if (v.waypoints.size() < 2) {
      throw ScenarioError(mpath + ".points", "needs at least 2 waypoints");
    }
    if (v.waypoints.front().t != 0.0) {
      throw ScenarioError(mpath + ".points[0].t", "first waypoint must be at t = 0");
    }
    v.initial.s = v.waypoints.front().s;
    v.initial.d = v.waypoints.front().d;
    v.initial.lane_id = road.lane_at(v.initial.d).id;
  } else {
    throw ScenarioError(mpath + ".type", fmt::format("unknown motion '{}'", type));
  }
  return v;
}

void parse_planner(const json & j, PlannerConfig & cfg)
{
  Node n(j, "planner", {"dt", "steps", "d_safe", "lane_change_duration", "bands_per_lane",
                        "costmap_behind", "max_chain"});
  cfg.dt = n.positive("dt", cfg.dt);
  cfg.steps = n.integer("steps", cfg.steps);
  if (cfg.steps < 4) {
    throw ScenarioError(n.field("steps"), "must be at least 4");
  }
  cfg.d_safe = n.number("d_safe", cfg.d_safe);
  if (cfg.d_safe < 0.0) {
    throw ScenarioError(n.field("d_safe"), "must be non-negative");
  }
  cfg.route.lane_change_duration =
    n.positive("lane_change_duration", cfg.route.lane_change_duration);
  cfg.corridor.bands_per_lane = n.integer("bands_per_lane", cfg.corridor.bands_per_lane);
  if (cfg.corridor.bands_per_lane < 1) {
    throw ScenarioError(n.field("bands_per_lane"), "must be at least 1");
  }
  cfg.costmap_behind = n.number("costmap_behind", cfg.costmap_behind);
  cfg.route.max_chain = n.integer("max_chain", cfg.route.max_chain);
}

/// Propagate values that several stages share.
void sync_planner(Scenario & sc)
{
  auto & p = sc.planner;
  p.corridor.d_safe = p.d_safe;
  p.corridor.vehicle_width = sc.ego.width;
  p.route.d_safe = p.d_safe;
  p.route.ego_length = sc.ego.length;
  p.optimizer.d_safe_projected = p.d_safe;
  p.optimizer.vehicle_width = sc.ego.width;
  p.optimizer.vehicle_length = sc.ego.length;
}

}  // namespace

VehicleObservation VehicleScript::observe(double t, const Road & road) const
{
  VehicleObservation o;
  o.id = id;
  o.state = initial;
  switch (motion) {
    case MotionType::kConstantSpeed:
      o.state.s = initial.s + initial.v * t;
      break;
    case MotionType::kConstantAccel: {
      const double v0 = initial.v;
      // Time at which the speed reaches the cap (or zero when braking).
      const double v_lim = accel >= 0.0 ? std::max(v0, speed_cap) : 0.0;
      const double t_lim = accel == 0.0 ? t : std::max(0.0, (v_lim - v0) / accel);
      const double tc = std::min(t, t_lim);
      const double vc = v0 + accel * tc;
      o.state.s = initial.s + v0 * tc + 0.5 * accel * tc * tc + vc * (t - tc);
      o.state.v = vc;
      o.accel = t < t_lim ? accel : 0.0;
      break;
    }
    case MotionType::kWaypoints: {
      const auto & w = waypoints;
      std::size_t i = 0;
      while (i + 2 < w.size() && t >= w[i + 1].t) {
        ++i;
      }
      const double span = w[i + 1].t - w[i].t;
      const double vs = (w[i + 1].s - w[i].s) / span;
      const double vd = (w[i + 1].d - w[i].d) / span;
      const double tt = std::min(t, w.back().t) - w[i].t;
      o.state.s = w[i].s + vs * tt + (t > w.back().t ? vs * (t - w.back().t) : 0.0);
      o.state.d = w[i].d + vd * tt;
      o.state.v = std::max(0.0, vs);
      o.lateral_velocity = t > w.back().t ? 0.0 : vd;
      break;
    }
  }
  o.state.lane_id = road.lane_at(o.state.d).id;
  return o;
}

Polygon frenet_box(
  const Road & road, double s_start, double s_end, double d_min, double d_max, double spacing)
{
  const int n = std::max(1, static_cast<int>(std::ceil((s_end - s_start) / spacing)));
  Polygon poly;
  for (int i = 0; i <= n; ++i) {
    poly.push_back(road.reference.to_cartesian(s_start + (s_end - s_start) * i / n, d_min));
  }
  for (int i = n; i >= 0; --i) {
    poly.push_back(road.reference.to_cartesian(s_start + (s_end - s_start) * i / n, d_max));
  }
  return poly;
}

Scenario parse_scenario(std::string_view text)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ScenarioError("<root>", fmt::format("invalid JSON: {}", e.what()));
  }
  Node top(root, "", {"schema_version", "name", "road", "obstacles", "vehicles", "ego", "limits",
                      "run", "traffic", "planner"});
  Scenario sc;
  sc.schema_version = top.integer("schema_version");
  if (sc.schema_version != kScenarioSchemaVersion) {
    throw ScenarioError("schema_version", fmt::format(
      "unsupported version {} (expected {})", sc.schema_version, kScenarioSchemaVersion));
  }
  sc.name = top.has("name") ? top.string("name") : std::string("unnamed");
  top.raw("road");
  sc.road = parse_road(root);

  if (top.has("limits")) {
    Node n(root.at("limits"), "limits", {"v_max", "v_max_kmh", "v_sig", "v_sig_kmh"});
    sc.mobility.v_max = n.speed("v_max", sc.mobility.v_max);
    sc.v_sig = n.speed("v_sig", sc.v_sig);
    if (sc.mobility.v_max <= 0.0) {
      throw ScenarioError("limits.v_max", "must be positive");
    }
  }

  {
    Node n(top.raw("ego"), "ego", {"s", "d", "v", "v_kmh", "length", "width", "lateral_velocity",
                                   "mobility"});
    sc.ego.s = n.number("s");
    sc.ego.d = n.number("d");
    check_on_road(sc.road, sc.ego.d, "ego.d");
    const auto v = n.speed("v");
    if (!v) {
      throw ScenarioError("ego.v", "missing required field");
    }
    sc.ego.v = *v;
    sc.ego.length = n.positive("length", 4.5);
    sc.ego.width = n.positive("width", 1.8);
    sc.ego.lane_id = sc.road.lane_at(sc.ego.d).id;
    sc.ego_lateral_velocity = n.number("lateral_velocity", 0.0);
    if (sc.ego.s < 0.0 || sc.ego.s > sc.road.reference.length()) {
      throw ScenarioError("ego.s", "outside the reference path");
    }
    if (n.has("mobility")) {
      Node m(n.raw("mobility"), "ego.mobility", {"decel", "accel", "a_cen", "a_dec"});
      if (m.has("decel")) {
        sc.mobility.decel_of_v = parse_bound(m.raw("decel"), m.field("decel"));
      }
      if (m.has("accel")) {
        sc.mobility.accel_of_v = parse_bound(m.raw("accel"), m.field("accel"));
      }
      sc.mobility.a_cen = m.positive("a_cen", sc.mobility.a_cen);
      sc.mobility.a_dec = m.number("a_dec", sc.mobility.a_dec);
    }
    try {
      sc.mobility.validate();
    } catch (const PlanningError & e) {
      throw ScenarioError("ego.mobility", e.what());
    }
  }

  if (top.has("obstacles")) {
    const auto & obs = top.array("obstacles");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string path = fmt::format("obstacles[{}]", i);
      Node n(obs[i], path, {"polygon", "frenet_box"});
      if (n.has("polygon") == n.has("frenet_box")) {
        throw ScenarioError(path, "exactly one of 'polygon' or 'frenet_box' is required");
      }
      if (n.has("polygon")) {
        sc.obstacles.push_back(parse_polyline(n.raw("polygon"), n.field("polygon"), 3));
      } else {
        Node b(n.raw("frenet_box"), n.field("frenet_box"), {"s_start", "s_end", "d_min", "d_max"});
        const double s0 = b.number("s_start");
        const double s1 = b.number("s_end");
        const double d0 = b.number("d_min");
        const double d1 = b.number("d_max");
        if (s1 <= s0) {
          throw ScenarioError(b.field("s_end"), "must exceed s_start");
        }
        if (d1 <= d0) {
          throw ScenarioError(b.field("d_max"), "must exceed d_min");
        }
        sc.obstacles.push_back(frenet_box(sc.road, s0, s1, d0, d1));
      }
    }
  }

  std::set<int> vehicle_ids;
  if (top.has("vehicles")) {
    const auto & vs = top.array("vehicles");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string path = fmt::format("vehicles[{}]", i);
      auto v = parse_vehicle(vs[i], path, sc.road);
      if (!vehicle_ids.insert(v.id).second) {
        throw ScenarioError(path + ".id", "duplicate vehicle id");
      }
      sc.vehicles.push_back(std::move(v));
    }
  }

  if (top.has("run")) {
    Node n(root.at("run"), "run", {"duration", "replan_period", "sim_step", "seed"});
    sc.run.duration = n.positive("duration", sc.run.duration);
    sc.run.sim_step = n.positive("sim_step", sc.run.sim_step);
    sc.run.replan_period = n.positive("replan_period", sc.run.replan_period);
    const int seed = n.integer("seed", 0);
    if (seed < 0) {
      throw ScenarioError("run.seed", "must be non-negative");
    }
    sc.run.seed = static_cast<std::uint64_t>(seed);
  }
  if (sc.run.replan_period < sc.run.sim_step) {
    throw ScenarioError("run.replan_period", "must be at least run.sim_step");
  }

  if (top.has("traffic")) {
    Node n(root.at("traffic"), "traffic", {"count", "lanes", "s_min", "s_max", "v_min", "v_min_kmh",
                                           "v_max", "v_max_kmh", "min_gap"});
    TrafficSettings t;
    t.count = n.integer("count");
    if (t.count < 0) {
      throw ScenarioError(n.field("count"), "must be non-negative");
    }
    if (n.has("lanes")) {
      const auto & ls = n.array("lanes");
      for (std::size_t i = 0; i < ls.size(); ++i) {
        const std::string path = fmt::format("traffic.lanes[{}]", i);
        if (!ls[i].is_number_integer() || sc.road.lane_by_id(ls[i].get<int>()) == nullptr) {
          throw ScenarioError(path, "expected an existing lane id");
        }
        t.lanes.push_back(ls[i].get<int>());
      }
    }
    t.s_min = n.number("s_min", t.s_min);
    t.s_max = n.number("s_max", t.s_max);
    if (t.s_max < t.s_min) {
      throw ScenarioError(n.field("s_max"), "must be at least s_min");
    }
    t.v_min = n.speed("v_min", t.v_min);
    t.v_max = n.speed("v_max", t.v_max);
    if (t.v_max < t.v_min) {
      throw ScenarioError(n.field("v_max"), "must be at least v_min");
    }
    t.min_gap = n.number("min_gap", t.min_gap);
    sc.traffic = t;
  }

  if (top.has("planner")) {
    parse_planner(root.at("planner"), sc.planner);
  }
  sync_planner(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError("<file>", fmt::format("cannot read '{}'", path.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void populate_traffic(Scenario & sc, std::uint64_t seed)
{
  if (!sc.traffic || sc.traffic->count == 0) {
    return;
  }
  const auto & t = *sc.traffic;
  std::vector<int> lanes = t.lanes;
  if (lanes.empty()) {
    for (const auto & l : sc.road.lanes) {
      lanes.push_back(l.id);
    }
  }
  int next_id = 1;
  for (const auto & v : sc.vehicles) {
    next_id = std::max(next_id, v.id + 1);
  }
  std::mt19937_64 rng(seed);
  // Draw from the raw engine so the sequence does not depend on the
  // standard library's distribution implementations.
  auto uniform = [&rng](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  auto clear_of = [&](int lane, double s) {
    const Lane & ln = *sc.road.lane_by_id(lane);
    if (ln.contains(sc.ego.d) && std::abs(s - sc.ego.s) < t.min_gap) {
      return false;
    }
    return std::none_of(sc.vehicles.begin(), sc.vehicles.end(), [&](const VehicleScript & v) {
      return v.initial.lane_id == lane && std::abs(v.initial.s - s) < t.min_gap;
    });
  };
  for (int i = 0; i < t.count; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const int lane = lanes[static_cast<std::size_t>(rng() % lanes.size())];
      const double s = uniform(t.s_min, t.s_max);
      const double v = uniform(t.v_min, t.v_max);
      if (!clear_of(lane, s)) {
        continue;
      }
      VehicleScript vs;
      vs.id = next_id++;
      vs.initial.s = s;
      vs.initial.d = sc.road.lane_by_id(lane)->d_center;
      vs.initial.v = v;
      vs.initial.lane_id = lane;
      sc.vehicles.push_back(vs);
      break;
    }
  }
}

}  // namespace mplan
