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

#include "mplan/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

namespace mplan
{

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

template <typename T>
T pick(const std::vector<T> & v, std::size_t i)
{
  return v.empty() ? T{} : v[std::min(i, v.size() - 1)];
}

json window_json(const ManeuverWindow & w)
{
  return {{"br", w.br}, {"bl", w.bl}, {"fr", w.fr}, {"fl", w.fl}, {"te", w.te},
          {"source", w.source}, {"target", w.target}, {"feasible", w.feasible()}};
}

json finite_or_null(double x)
{
  return std::isfinite(x) ? json(x) : json(nullptr);
}

/// Linear map of [a0, a1] onto [b0, b1].
struct Axis
{
  double a0;
  double a1;
  double b0;
  double b1;
  double operator()(double x) const
  {
    const double span = a1 - a0;
    return b0 + (span == 0.0 ? 0.0 : (x - a0) / span) * (b1 - b0);
  }
};

std::string points_attr(const std::vector<std::pair<double, double>> & pts)
{
  std::string out;
  for (const auto & [x, y] : pts) {
    out += fmt::format("{}{:.2f},{:.2f}", out.empty() ? "" : " ", x, y);
  }
  return out;
}

}  // namespace

void write_file_atomic(const fs::path & path, const std::string & content)
{
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw OutputError(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw OutputError(fmt::format("failed writing '{}'", path.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError(fmt::format("cannot move '{}' into place", path.string()));
  }
}

std::string metrics_csv(std::span<const CycleMetrics> cycles)
{
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto & m : cycles) {
    out += fmt::format(
      "{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{},{},{}\n", m.cycle, m.time, m.t_static_topology,
      m.t_dynamic_topology, m.t_optimization, m.maneuver_count, m.selected_id, m.route_count,
      m.corridor_count, m.emergency ? 1 : 0);
  }
  return out;
}

std::string trajectory_csv(const Trajectory & trajectory, const Road & road, double t0)
{
  const auto diff = forward_differences(trajectory.s, trajectory.dt);
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double s = trajectory.s[k];
    const double d = trajectory.d[k];
    const Vec2 p = road.reference.to_cartesian(s, d);
    out += fmt::format(
      "{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
      t0 + trajectory.dt * static_cast<double>(k), s, d, p.x, p.y, pick(diff.v, k),
      pick(diff.a, k), pick(diff.jerk, k));
  }
  return out;
}

std::string trace_csv(std::span<const TraceSample> trace)
{
  std::string out = std::string(kTraceHeader) + "\n";
  for (const auto & r : trace) {
    out += fmt::format(
      "{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.t, r.ego.s, r.ego.d,
      r.ego.x, r.ego.y, r.ego.heading, r.v, r.a, r.jerk);
  }
  return out;
}

std::string actors_csv(std::span<const TraceSample> trace)
{
  std::string out = std::string(kActorsHeader) + "\n";
  for (const auto & r : trace) {
    for (const auto & a : r.actors) {
      out += fmt::format(
        "{:.6f},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.t, a.id, a.s, a.d, a.x,
        a.y, a.heading, a.length, a.width);
    }
  }
  return out;
}

std::string cycle_json(const PlanningResult & result, bool pretty)
{
  json j;
  j["cycle"] = result.metrics.cycle;
  j["time"] = result.metrics.time;
  j["selected"] = result.metrics.selected_id;
  j["emergency"] = result.metrics.emergency;
  j["failure"] = result.failure;

  json profiles = json::array();
  for (const auto & p : result.dynamic_topology.profiles.profiles) {
    profiles.push_back({{"id", p.id}, {"lane", p.lane_id}, {"zone", p.zone},
                        {"k_begin", p.k_begin}, {"k_end", p.k_end},
                        {"rear_vehicle", p.rear_vehicle}, {"front_vehicle", p.front_vehicle},
                        {"contains_ego", p.contains_ego}});
  }
  j["profiles"] = profiles;

  json routes = json::array();
  for (const auto & r : result.dynamic_topology.routes) {
    json w = json::array();
    for (const auto & win : r.windows) {
      w.push_back(window_json(win));
    }
    routes.push_back({{"chain", r.chain},
                      {"lanes", route_lanes(r, result.dynamic_topology.profiles)},
                      {"windows", w}, {"feasible", r.feasible}});
  }
  j["routes"] = routes;

  json corridors = json::array();
  for (const auto & c : result.static_topology.corridors) {
    std::vector<int> chain;
    for (const auto & s : c.chain) {
      chain.push_back(s.id);
    }
    corridors.push_back({{"chain", chain}, {"lanes", c.involved_lanes},
                         {"effective_length", c.effective_length}, {"blocked", c.blocked}});
  }
  j["corridors"] = corridors;

  json maneuvers = json::array();
  for (const auto & m : result.maneuvers) {
    json w = json::array();
    for (const auto & win : m.windows) {
      w.push_back(window_json(win));
    }
    json mj = {{"id", m.id}, {"key", m.key}, {"lanes", m.lane_sequence},
               {"corridor", m.corridor_index}, {"route", m.route_index},
               {"feasible", m.feasible}, {"rejection", m.rejection}, {"windows", w},
               {"age", m.age}};
    if (m.result) {
      const auto & r = *m.result;
      mj["limits"] = {{"v_end", r.limits.v_end}, {"s_end", r.limits.s_end},
                      {"stop", r.limits.stop}};
      mj["solver"] = {{"longitudinal_iterations", r.longitudinal.iterations},
                      {"lateral_iterations", r.lateral.iterations},
                      {"longitudinal_violations", r.longitudinal_violations},
                      {"lateral_violations", r.lateral_violations},
                      {"lateral_tight", r.lateral_tight}};
      if (m.feasible) {
        mj["cost"] = {{"comfort", m.cost.comfort}, {"safety", m.cost.safety},
                      {"efficiency", m.cost.efficiency}, {"bonus", m.cost.bonus},
                      {"total", m.cost.total}};
      }
      mj["end"] = {{"s", r.trajectory.s.back()}, {"d", r.trajectory.d.back()}};
    }
    maneuvers.push_back(mj);
  }
  j["maneuvers"] = maneuvers;
  j["chosen"] = {{"key", result.chosen.key}, {"lanes", result.chosen.lane_sequence}};
  if (const auto * traj = result.chosen.trajectory()) {
    j["chosen"]["end"] = {{"s", finite_or_null(traj->s.back())},
                          {"d", finite_or_null(traj->d.back())}};
  }
  return pretty ? j.dump(2) : j.dump();
}

std::string cycle_svg(const PlanningResult & result, const Road & road, const VehicleState & ego)
{
  const auto & dyn = result.dynamic_topology;
  const double w = 800.0;
  const double h = 640.0;
  std::string body;

  // s-t panel.
  const int n = static_cast<int>(dyn.base.lower.size()) - 1;
  const double t_max = std::max(1e-6, n * (result.chosen.result ? result.chosen.result->trajectory.dt : 0.25));
  double s_lo = ego.s;
  double s_hi = ego.s + 1.0;
  for (double x : dyn.base.lower) {
    s_lo = std::min(s_lo, x);
  }
  for (double x : dyn.base.upper) {
    s_hi = std::max(s_hi, x);
  }
  const Axis tx{0.0, t_max, 60.0, w - 20.0};
  const Axis sy{s_lo, s_hi, 290.0, 30.0};
  const double dt = n > 0 ? t_max / n : 0.0;
  body += "<g id=\"st\">\n";
  body += fmt::format(
    "<text x=\"60\" y=\"20\" font-size=\"12\">s-t profiles (t 0..{:.1f} s, s {:.1f}..{:.1f} m)"
    "</text>\n", t_max, s_lo, s_hi);
  for (const auto & p : dyn.profiles.profiles) {
    std::vector<std::pair<double, double>> pts;
    for (int k = p.k_begin; k <= p.k_end; ++k) {
      pts.emplace_back(tx(k * dt), sy(p.lower[static_cast<std::size_t>(k)]));
    }
    for (int k = p.k_end; k >= p.k_begin; --k) {
      pts.emplace_back(tx(k * dt), sy(p.upper[static_cast<std::size_t>(k)]));
    }
    body += fmt::format(
      "<polygon class=\"profile\" data-id=\"{}\" data-lane=\"{}\" points=\"{}\" "
      "fill=\"#4a90d9\" fill-opacity=\"0.2\" stroke=\"#4a90d9\"/>\n",
      p.id, p.lane_id, points_attr(pts));
  }
  if (const auto * traj = result.chosen.trajectory()) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < traj->size(); ++k) {
      pts.emplace_back(tx(traj->dt * static_cast<double>(k)), sy(traj->s[k]));
    }
    body += fmt::format(
      "<polyline class=\"trajectory\" points=\"{}\" fill=\"none\" stroke=\"#d0021b\"/>\n",
      points_attr(pts));
  }
  body += "</g>\n";

  // d-s panel.
  double c_hi = ego.s + 1.0;
  for (const auto & c : result.static_topology.corridors) {
    c_hi = std::max(c_hi, c.s0 + c.step * static_cast<double>(c.d_lower.size()));
  }
  const Axis sx{ego.s, c_hi, 60.0, w - 20.0};
  const Axis dy{road.d_min(), road.d_max(), h - 20.0, 340.0};
  body += "<g id=\"ds\">\n";
  body += fmt::format(
    "<text x=\"60\" y=\"330\" font-size=\"12\">d-s corridors (s {:.1f}..{:.1f} m)</text>\n",
    ego.s, c_hi);
  for (const auto & lane : road.lanes) {
    for (double d : {lane.d_right(), lane.d_left()}) {
      body += fmt::format(
        "<line class=\"lane-line\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"#999\"/>\n", sx(ego.s), dy(d), sx(c_hi), dy(d));
    }
  }
  for (const auto & sec : result.static_topology.graph.sections) {
    body += fmt::format(
      "<rect class=\"section\" data-id=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" "
      "height=\"{:.2f}\" fill=\"none\" stroke=\"#ccc\"/>\n",
      sec.id, sx(sec.s_start), dy(sec.d_upper), sx(sec.s_end) - sx(sec.s_start),
      dy(sec.d_lower) - dy(sec.d_upper));
  }
  for (std::size_t ci = 0; ci < result.static_topology.corridors.size(); ++ci) {
    const auto & c = result.static_topology.corridors[ci];
    std::vector<std::pair<double, double>> pts;
    const auto m = c.d_lower.size();
    for (std::size_t i = 0; i < m; ++i) {
      pts.emplace_back(sx(c.s0 + c.step * static_cast<double>(i)), dy(c.d_lower[i]));
    }
    for (std::size_t i = m; i-- > 0;) {
      pts.emplace_back(sx(c.s0 + c.step * static_cast<double>(i)), dy(c.d_upper[i]));
    }
    body += fmt::format(
      "<polygon class=\"corridor\" data-index=\"{}\" points=\"{}\" fill=\"#7ed321\" "
      "fill-opacity=\"0.15\" stroke=\"#417505\"/>\n", ci, points_attr(pts));
  }
  if (const auto * traj = result.chosen.trajectory()) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < traj->size(); ++k) {
      pts.emplace_back(sx(traj->s[k]), dy(traj->d[k]));
    }
    body += fmt::format(
      "<polyline class=\"path\" points=\"{}\" fill=\"none\" stroke=\"#d0021b\"/>\n",
      points_attr(pts));
  }
  body += "</g>\n";

  return fmt::format(
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
    "viewBox=\"0 0 {:.0f} {:.0f}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}"
    "</svg>\n", w, h, w, h, body);
}

void write_cycle_files(
  const fs::path & dir, const PlanningInput & input, const PlanningResult & result)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw OutputError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  }
  const auto * traj = result.chosen.trajectory();
  write_file_atomic(
    dir / "trajectory.csv",
    traj ? trajectory_csv(*traj, *input.road, result.metrics.time) : std::string(kTrajectoryHeader) + "\n");
  write_file_atomic(dir / "maneuvers.json", cycle_json(result, true) + "\n");
  const CycleMetrics m[] = {result.metrics};
  write_file_atomic(dir / "metrics.csv", metrics_csv(m));
  write_file_atomic(dir / "plot.svg", cycle_svg(result, *input.road, input.ego));
}

OutputWriter::OutputWriter(fs::path dir, bool plots) : dir_(std::move(dir)), plots_(plots)
{
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw OutputError(fmt::format("cannot create output directory '{}'", dir_.string()));
  }
  // Probe writability up front so a failing run leaves nothing behind.
  const fs::path probe = dir_ / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) {
      throw OutputError(fmt::format("output directory '{}' is not writable", dir_.string()));
    }
  }
  fs::remove(probe, ec);
}

void OutputWriter::add_cycle(const PlanningInput & input, const PlanningResult & result)
{
  jsonl_ += cycle_json(result) + "\n";
  if (plots_) {
    write_cycle_files(
      dir_ / "cycles" / fmt::format("{:06d}", result.metrics.cycle), input, result);
  }
}

void OutputWriter::finish(const std::string & scenario_name, const SimulationResult & sim)
{
  write_file_atomic(dir_ / "metrics.csv", metrics_csv(sim.cycles));
  write_file_atomic(dir_ / "trace.csv", trace_csv(sim.trace));
  write_file_atomic(dir_ / "actors.csv", actors_csv(sim.trace));
  write_file_atomic(dir_ / "maneuvers.jsonl", jsonl_);
  json summary = {{"scenario", scenario_name},
                  {"cycles", sim.cycles.size()},
                  {"emergency_cycles", sim.emergency_cycles},
                  {"collision", sim.collision},
                  {"collision_time", sim.collision ? json(sim.collision_time) : json(nullptr)},
                  {"collision_reason", sim.collision_reason},
                  {"reached_road_end", sim.reached_road_end},
                  {"duration", sim.trace.empty() ? 0.0 : sim.trace.back().t}};
  write_file_atomic(dir_ / "summary.json", summary.dump(2) + "\n");
}

}  // namespace mplan
