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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any
// failure.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mplan/corridor.hpp"
#include "mplan/optimizer.hpp"
#include "mplan/output.hpp"
#include "mplan/planner.hpp"
#include "mplan/scenario.hpp"
#include "mplan/simulation.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

namespace
{

namespace fs = std::filesystem;
using namespace mplan;

struct Outcome
{
  bool pass{true};
  std::string detail;

  void require(bool ok, const std::string & what)
  {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

fs::path scratch_dir(const std::string & name)
{
  const fs::path dir = fs::temp_directory_path() / fmt::format("mplan_acceptance_{}_{}", name, ::getpid());
  fs::remove_all(dir);
  return dir;
}

PlanningInput initial_input(const Scenario & sc)
{
  PlanningInput in;
  in.road = &sc.road;
  in.obstacles = sc.obstacles;
  in.ego = sc.ego;
  in.ego_lateral_velocity = sc.ego_lateral_velocity;
  for (const auto & v : sc.vehicles) {
    in.vehicles.push_back(v.observe(0.0, sc.road));
  }
  in.mobility = sc.mobility;
  in.v_sig = sc.v_sig;
  return in;
}

Outcome emergency_merge()
{
  Outcome out;
  const auto sc = load_scenario(scenes::scenario_path("emergency_merge.json"));

  Planner planner(sc.planner);
  const auto first = planner.plan(initial_input(sc));
  int merges = 0;
  int stops = 0;
  int pruned_front_merges = 0;
  for (const auto & m : first.maneuvers) {
    const bool merge = m.lane_sequence == std::vector<int>{0, 1};
    if (m.feasible && m.result) {
      merges += merge ? 1 : 0;
      stops += (m.lane_sequence == std::vector<int>{0} && m.result->limits.stop) ? 1 : 0;
    } else if (merge) {
      const auto & end = first.dynamic_topology.profiles.profiles[static_cast<std::size_t>(m.route.chain.back())];
      pruned_front_merges += end.front_vehicle == -1 ? 1 : 0;
    }
  }
  const auto routes = first.dynamic_topology.routes.size();
  out.require(routes >= 4, fmt::format("{} routes", routes));
  out.require(first.feasible_count() == 3, fmt::format("{} feasible", first.feasible_count()));
  out.require(merges == 2 && stops == 1, fmt::format("{} merges, {} stops", merges, stops));
  out.require(pruned_front_merges == 1, "front merge not pruned");

  const fs::path dir = scratch_dir("merge");
  SimulationResult sim;
  {
    OutputWriter writer(dir, false);
    SimulationOptions opts;
    opts.replan_period = sc.run.replan_period;
    opts.on_cycle = [&](const PlanningInput & in, const PlanningResult & res) { writer.add_cycle(in, res); };
    sim = run_simulation(sc, opts);
    writer.finish(sc.name, sim);
  }
  std::vector<oracle::ConvexPolygon> obstacles(sc.obstacles.begin(), sc.obstacles.end());
  const auto audit = oracle::audit_run(dir, sc.ego.length, sc.ego.width, obstacles);
  fs::remove_all(dir);

  const double target_d = sc.road.lane_by_id(1)->d_center;
  const auto & last = sim.trace.back();
  out.require(!sim.collision, "collision: " + sim.collision_reason);
  out.require(audit.clean, "audit: " + audit.first_hit);
  out.require(std::abs(last.t - 15.0) < 1e-9, fmt::format("ran {:.2f}s", last.t));
  out.require(std::abs(last.ego.d - target_d) < 0.2, fmt::format("final d {:.2f}", last.ego.d));
  if (out.pass) {
    out.detail = fmt::format(
      "{} routes, 3 feasible (2 merge, 1 stop), front merge pruned, merged to d={:.2f} in 15 s, "
      "{} audited samples clean",
      routes, last.ego.d, audit.samples);
  }
  return out;
}

Outcome corridor_terminal_layout()
{
  Outcome out;
  const auto topo = scenes::two_lane_layout_topology();
  const auto labels = scenes::terminal_labels(topo);
  const std::set<std::string> expected{"s00", "s70", "s90", "s01", "s20"};
  const std::string root = scenes::section_label(topo.graph.sections[static_cast<std::size_t>(topo.graph.root)]);
  std::string got;
  for (const auto & l : labels) {
    got += l + " ";
  }
  out.require(labels == expected, "terminals " + got);
  out.require(root == "s20", "root " + root);
  if (out.pass) {
    out.detail = "terminals {s00, s70, s90, s01} plus root s20";
  }
  return out;
}

Outcome cycle_timing()
{
  Outcome out;
  auto sc = load_scenario(scenes::scenario_path("random_traffic.json"));
  populate_traffic(sc, sc.run.seed);
  SimulationOptions opts;
  opts.replan_period = sc.run.replan_period;
  const auto sim = run_simulation(sc, opts);
  std::vector<double> t_static;
  std::vector<double> t_dynamic;
  std::vector<double> t_opt;
  for (const auto & c : sim.cycles) {
    t_static.push_back(c.t_static_topology);
    t_dynamic.push_back(c.t_dynamic_topology);
    t_opt.push_back(c.t_optimization);
  }
  const double ps = oracle::percentile(t_static, 99.0);
  const double pd = oracle::percentile(t_dynamic, 99.0);
  const double po = oracle::percentile(t_opt, 99.0);
  out.require(sim.cycles.size() >= 500, fmt::format("{} cycles", sim.cycles.size()));
  out.require(!sim.collision, "collision: " + sim.collision_reason);
  out.require(ps <= 5.0, fmt::format("static p99 {:.3f} ms", ps));
  out.require(pd <= 1.0, fmt::format("dynamic p99 {:.3f} ms", pd));
  out.require(po <= 40.0, fmt::format("optimization p99 {:.3f} ms", po));
  out.require(pd < ps && ps < po, "ordering dynamic < static < optimization violated");
  out.detail = fmt::format(
    "{} cycles, p99 static {:.3f} ms, dynamic {:.3f} ms, optimization {:.3f} ms{}", sim.cycles.size(), ps,
    pd, po, out.detail.empty() ? "" : " | " + out.detail);
  return out;
}

Outcome optimizer_oracle()
{
  Outcome out;
  std::mt19937_64 rng(7001);
  double worst_cost = 0.0;
  double worst_x = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    for (const auto & p : {oracle::random_longitudinal_problem(rng, 8), oracle::random_lateral_problem(rng, 8)}) {
      const Eigen::VectorXd ref = oracle::tracking_minimizer(p);
      const auto sol = solve_tracking(p, std::vector<double>(static_cast<std::size_t>(ref.size()), 0.0), {});
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(sol.x.data(), ref.size());
      const double c_ref = oracle::tracking_cost(p, ref);
      worst_cost = std::max(worst_cost, std::abs(oracle::tracking_cost(p, x) - c_ref) / std::max(1.0, std::abs(c_ref)));
      worst_x = std::max(worst_x, (x - ref).cwiseAbs().maxCoeff());
    }
  }
  out.require(worst_cost <= 1e-4, fmt::format("relative cost error {:.3e}", worst_cost));
  out.require(worst_x <= 1e-3, fmt::format("position error {:.3e} m", worst_x));
  out.detail = fmt::format(
    "100 problems (50 longitudinal + 50 lateral, N=8): max relative cost error {:.2e}, max position error {:.2e} m",
    worst_cost, worst_x);
  return out;
}

Outcome gradient_check()
{
  Outcome out;
  std::mt19937_64 rng(7003);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  double worst = 0.0;
  for (int point = 0; point < 100; ++point) {
    const auto p = point % 2 == 0 ? oracle::random_longitudinal_problem(rng, 8) : oracle::random_lateral_problem(rng, 8);
    Eigen::VectorXd x(p.steps() + 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = u(rng);
    }
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    p.residuals(x, r, &jac);
    const auto fd = oracle::central_difference_jacobian(
      [&p](const Eigen::VectorXd & y) {
        Eigen::VectorXd res;
        p.residuals(y, res, nullptr);
        return res;
      },
      x, 1e-4);
    worst = std::max(worst, (fd - jac).norm() / std::max(1.0, jac.norm()));
  }
  out.require(worst < 1e-5, fmt::format("relative error {:.3e}", worst));
  out.detail = fmt::format("100 points, max relative Jacobian error {:.2e}", worst);
  return out;
}

Outcome geometry_round_trip()
{
  Outcome out;
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int samples = 0;
  for (int path_id = 0; path_id < 20; ++path_id) {
    const auto path = ReferencePath::build(oracle::random_smooth_curve(rng, 300.0, 1.0 / 25.0));
    for (int i = 0; i < 500; ++i) {
      const double s = 1.0 + unit(rng) * (path.length() - 2.0);
      const double d = -5.0 + 10.0 * unit(rng);
      const auto f = path.to_frenet(path.to_cartesian(s, d));
      out.require(!f.extrapolated, "extrapolated projection");
      worst = std::max({worst, std::abs(f.s - s), std::abs(f.d - d)});
      ++samples;
    }
  }
  out.require(worst <= 1e-4, fmt::format("error {:.3e} m", worst));
  out.detail = fmt::format("{} samples on 20 paths, max error {:.2e} m", samples, worst);
  return out;
}

Outcome topology_oracles()
{
  Outcome out;
  std::mt19937_64 rng(5150);
  int grid_mismatch = 0;
  for (int layout = 0; layout < 100; ++layout) {
    const int rows = 2 + static_cast<int>(rng() % 29);
    const int cols = 2 + static_cast<int>(rng() % 29);
    const int root_row = static_cast<int>(rng() % static_cast<unsigned>(rows));
    const double density = 0.1 + 0.4 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto grid = scenes::random_grid(rng, rows, cols, density, root_row);
    grid_mismatch += scenes::library_grid_terminals(grid, root_row) == oracle::grid_bfs_terminals(grid, root_row) ? 0 : 1;
  }
  std::mt19937_64 scene_rng(8080);
  int route_mismatch = 0;
  int total_routes = 0;
  for (int i = 0; i < 100; ++i) {
    const auto scene = scenes::random_route_scene(scene_rng);
    const int expected = oracle::count_profile_chains(scene.topology.profiles, scene.road, 3);
    route_mismatch += static_cast<int>(scene.topology.routes.size()) == expected ? 0 : 1;
    total_routes += expected;
  }
  out.require(grid_mismatch == 0, fmt::format("{} corridor layouts differ", grid_mismatch));
  out.require(route_mismatch == 0, fmt::format("{} route scenes differ", route_mismatch));
  if (out.pass) {
    out.detail = fmt::format(
      "100 grid layouts match BFS terminals, 100 scenes match chain enumeration ({} routes)", total_routes);
  }
  return out;
}

Outcome worked_identities()
{
  Outcome out;
  auto near = [&](double got, double want, const char * what) {
    out.require(std::abs(got - want) <= 1e-9, fmt::format("{} = {} (want {})", what, got, want));
  };
  near(min_drivable_width(3.5 / 7.0, 1.8, 0.3), 2.4, "drivable width");
  near(curvature_speed_limit(2.0, 0.02, 100.0), 10.0, "curvature speed");
  const double v_max = 60.0 / 3.6;
  near(end_speed_target(10.0, 13.0, 12.0, 40, 0.5, v_max), std::min(10.0, std::max(13.0, 12.0 - 20.0)), "end speed");
  near(end_speed_target(100.0, 5.0, 30.0, 40, 0.5, 100.0), 10.0, "end speed (decelerating)");
  near(end_speed_target(100.0, 20.0, 12.0, 40, 0.5, v_max), v_max, "end speed (capped)");
  const double l_extra = extra_distance(0.5, 11.9, 2.0);
  near(l_extra, 7.95, "extra distance");
  near(end_pose_bound(145.0, 11.9, 1.5, l_extra, 4.5), 114.7, "end pose bound");
  std::vector<double> s;
  for (int k = 0; k <= 4; ++k) {
    s.push_back(static_cast<double>(k * k));
  }
  const auto fd = forward_differences(s, 1.0);
  near(fd.v[0], 1.0, "v0");
  near(fd.a[0], 2.0, "a0");
  near(fd.jerk[0], 0.0, "j0");

  const Road road = scenes::straight_road(500.0, {{0, 0.0, 3.5}, {1, 3.5, 3.5}});
  VehicleObservation steady;
  steady.id = 1;
  steady.state.v = 10.0;
  const auto p1 = predict_trajectories(std::vector<VehicleObservation>{steady}, road, -50.0, 0.5, 4);
  near(p1[0].states[2].s, 10.0, "predicted s");
  VehicleObservation accel = steady;
  accel.state.s = 100.0;
  accel.accel = 2.0;
  const auto p2 = predict_trajectories(std::vector<VehicleObservation>{accel}, road, 50.0, 0.25, 40);
  near(p2[0].states[40].s, 100.0 + 10.0 * 10.0, "accelerating front vehicle held");
  if (out.pass) {
    out.detail = "W_d=2.4, v_acc=10, v_end clamp, L_extra=7.95, s_end=114.7, (v0,a0,j0)=(1,2,0), s=10, front held";
  }
  return out;
}

}  // namespace

int main(int argc, char ** argv)
{
  // Optional criterion names restrict the run.
  const std::set<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"emergency_merge", emergency_merge},
    {"corridor_terminal_layout", corridor_terminal_layout},
    {"cycle_timing", cycle_timing},
    {"optimizer_oracle", optimizer_oracle},
    {"gradient_check", gradient_check},
    {"geometry_round_trip", geometry_round_trip},
    {"topology_oracles", topology_oracles},
    {"worked_identities", worked_identities},
  };
  int failures = 0;
  for (const auto & [name, fn] : criteria) {
    if (!only.empty() && only.count(name) == 0) {
      continue;
    }
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception & e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
