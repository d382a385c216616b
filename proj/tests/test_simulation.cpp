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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "mplan/output.hpp"
#include "mplan/planner.hpp"
#include "mplan/scenario.hpp"
#include "mplan/simulation.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

namespace mplan
{
namespace
{

namespace fs = std::filesystem;

class TempDir
{
public:
  TempDir()
  {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("mplan_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path & path() const { return path_; }

private:
  fs::path path_;
};

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int count(const std::string & text, const std::string & needle)
{
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

SimulationResult run_to(const Scenario & sc, const fs::path & dir, bool plots)
{
  OutputWriter writer(dir, plots);
  SimulationOptions opts;
  opts.replan_period = sc.run.replan_period;
  opts.on_cycle = [&](const PlanningInput & in, const PlanningResult & res) { writer.add_cycle(in, res); };
  auto sim = run_simulation(sc, opts);
  writer.finish(sc.name, sim);
  return sim;
}

std::vector<oracle::ConvexPolygon> convex_obstacles(const Scenario & sc)
{
  std::vector<oracle::ConvexPolygon> out;
  for (const auto & p : sc.obstacles) {
    out.push_back(p);
  }
  return out;
}

TEST(Output, PerCycleFilesFollowTheContract)
{
  auto sc = load_scenario(scenes::scenario_path("emergency_merge.json"));
  sc.run.duration = 0.5;
  TempDir tmp;
  std::vector<PlanningResult> results;
  OutputWriter writer(tmp.path(), true);
  SimulationOptions opts;
  opts.on_cycle = [&](const PlanningInput & in, const PlanningResult & res) {
    writer.add_cycle(in, res);
    results.push_back(res);
  };
  const auto sim = run_simulation(sc, opts);
  writer.finish(sc.name, sim);
  ASSERT_EQ(results.size(), 5u);

  for (const char * f : {"metrics.csv", "trace.csv", "actors.csv", "maneuvers.jsonl", "summary.json"}) {
    EXPECT_TRUE(fs::exists(tmp.path() / f)) << f;
  }
  const auto metrics = oracle::read_csv(tmp.path() / "metrics.csv");
  ASSERT_EQ(metrics.size(), results.size() + 1);
  EXPECT_EQ(slurp(tmp.path() / "metrics.csv").substr(0, std::string(kMetricsHeader).size()), kMetricsHeader);

  for (std::size_t c = 0; c < results.size(); ++c) {
    char name[16];
    std::snprintf(name, sizeof(name), "%06zu", c);
    const fs::path dir = tmp.path() / "cycles" / name;
    std::size_t files = 0;
    for ([[maybe_unused]] const auto & e : fs::directory_iterator(dir)) {
      ++files;
    }
    EXPECT_EQ(files, 4u);
    const auto traj = oracle::read_csv(dir / "trajectory.csv");
    ASSERT_EQ(traj.size(), static_cast<std::size_t>(sc.planner.steps) + 2);
    EXPECT_EQ(traj.front().size(), 8u);
    const std::string svg = slurp(dir / "plot.svg");
    EXPECT_EQ(count(svg, "class=\"profile\""), static_cast<int>(results[c].dynamic_topology.profiles.profiles.size()));
    EXPECT_EQ(count(svg, "class=\"corridor\""), static_cast<int>(results[c].static_topology.corridors.size()));
    EXPECT_EQ(count(svg, "class=\"section\""), static_cast<int>(results[c].static_topology.graph.sections.size()));
    EXPECT_TRUE(fs::exists(dir / "maneuvers.json"));
    EXPECT_EQ(oracle::read_csv(dir / "metrics.csv").size(), 2u);
  }
}

TEST(Output, TrajectoryCsvHeaderAndRows)
{
  const Road road = scenes::straight_road(100.0, {{0, 0.0, 3.5}});
  Trajectory t;
  t.dt = 0.5;
  t.s = {0.0, 1.0, 4.0, 9.0, 16.0};
  t.d = {0.0, 0.0, 0.0, 0.0, 0.0};
  const std::string csv = trajectory_csv(t, road, 2.0);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kTrajectoryHeader);
  EXPECT_EQ(count(csv, "\n"), 6);
  EXPECT_NE(csv.find("2.000000,0.000000,0.000000"), std::string::npos);
}

TEST(Output, UnwritableDirectoryIsRejected)
{
  TempDir tmp;
  const fs::path file = tmp.path() / "plain_file";
  std::ofstream(file) << "x";
  EXPECT_THROW(OutputWriter(file / "sub", false), OutputError);
}

TEST(Simulation, IdenticalRunsAreByteIdentical)
{
  auto sc = load_scenario(scenes::scenario_path("random_traffic.json"));
  sc.run.duration = 4.0;
  populate_traffic(sc, sc.run.seed);
  TempDir a;
  TempDir b;
  run_to(sc, a.path(), false);
  run_to(sc, b.path(), false);
  for (const char * f : {"trace.csv", "actors.csv", "maneuvers.jsonl", "summary.json"}) {
    EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
  }
}

TEST(Simulation, EmptyRoadKeepsLaneAndAccelerates)
{
  const auto sc = load_scenario(scenes::scenario_path("empty_road.json"));
  const auto sim = run_simulation(sc, {});
  ASSERT_FALSE(sim.collision);
  EXPECT_EQ(sim.emergency_cycles, 0);
  for (const auto & lanes : sim.selected_lanes) {
    EXPECT_EQ(lanes, std::vector<int>{sc.ego.lane_id});
  }
  EXPECT_GT(sim.trace.back().v, sc.ego.v + 2.0);
  EXPECT_LE(sim.trace.back().v, sc.v_sig + 1e-6);
}

TEST(Simulation, OvertakePassesTheSlowVehicle)
{
  const auto sc = load_scenario(scenes::scenario_path("overtake.json"));
  TempDir tmp;
  const auto sim = run_to(sc, tmp.path(), false);
  ASSERT_FALSE(sim.collision) << sim.collision_reason;
  const auto & last = sim.trace.back();
  ASSERT_EQ(last.actors.size(), 1u);
  EXPECT_GT(last.ego.s, last.actors[0].s + 10.0);
  // Out and back: the lateral speed changes sign once and stays moderate.
  EXPECT_NEAR(last.ego.d, sc.ego.d, 0.05);
  int reversals = 0;
  double prev = 0.0;
  for (std::size_t i = 1; i < sim.trace.size(); ++i) {
    const double vd = (sim.trace[i].ego.d - sim.trace[i - 1].ego.d) / (sim.trace[i].t - sim.trace[i - 1].t);
    EXPECT_LT(std::abs(vd), 1.5) << "t=" << sim.trace[i].t;
    if (std::abs(vd) > 0.05) {
      reversals += prev != 0.0 && (vd > 0.0) != (prev > 0.0) ? 1 : 0;
      prev = vd;
    }
  }
  EXPECT_EQ(reversals, 1);
  const auto audit = oracle::audit_run(tmp.path(), sc.ego.length, sc.ego.width, convex_obstacles(sc));
  EXPECT_TRUE(audit.clean) << audit.first_hit;
}

TEST(Simulation, EmergencyMergeCompletesWithoutCollision)
{
  const auto sc = load_scenario(scenes::scenario_path("emergency_merge.json"));
  TempDir tmp;
  const auto sim = run_to(sc, tmp.path(), false);
  EXPECT_FALSE(sim.collision) << sim.collision_reason;
  EXPECT_NEAR(sim.trace.back().t, sc.run.duration, 1e-9);
  EXPECT_NEAR(sim.trace.back().ego.d, sc.road.lane_by_id(1)->d_center, 0.2);
  // Executed acceleration never exceeds the vehicle's capability.
  for (const auto & smp : sim.trace) {
    EXPECT_GE(smp.a, -sc.mobility.decel_of_v(smp.v) - 1e-6) << "t=" << smp.t;
    EXPECT_LE(smp.a, sc.mobility.accel_of_v(smp.v) + 1e-6) << "t=" << smp.t;
  }
  const auto obstacles = convex_obstacles(sc);
  for (const auto & o : obstacles) {
    ASSERT_TRUE(oracle::is_convex(o));
  }
  const auto audit = oracle::audit_run(tmp.path(), sc.ego.length, sc.ego.width, obstacles);
  EXPECT_TRUE(audit.clean) << audit.first_hit;
  EXPECT_EQ(audit.samples, static_cast<int>(sim.trace.size()));
}

TEST(Simulation, CollisionIsDetectedAndStopsTheRun)
{
  // A stationary wall across the whole road cannot be avoided.
  auto sc = load_scenario(scenes::scenario_path("empty_road.json"));
  sc.obstacles.push_back(frenet_box(sc.road, 40.0, 41.0, -1.75, 5.25));
  sc.ego.v = 15.0;
  const auto sim = run_simulation(sc, {});
  EXPECT_TRUE(sim.collision);
  EXPECT_NE(sim.collision_reason.find("obstacle"), std::string::npos);
  EXPECT_NEAR(sim.trace.back().t, sim.collision_time, 1e-12);
}

TEST(Replanning, UnchangedWorldKeepsTheSelection)
{
  for (const char * f : {"emergency_merge.json", "overtake.json", "empty_road.json"}) {
    const auto sc = load_scenario(scenes::scenario_path(f));
    Planner planner(sc.planner);
    PlanningInput in;
    in.road = &sc.road;
    in.obstacles = sc.obstacles;
    in.ego = sc.ego;
    for (const auto & v : sc.vehicles) {
      in.vehicles.push_back(v.observe(0.0, sc.road));
    }
    in.mobility = sc.mobility;
    in.v_sig = sc.v_sig;
    const auto first = planner.plan(in);
    for (int cycle = 1; cycle < 6; ++cycle) {
      const auto next = planner.plan(in);
      EXPECT_EQ(next.chosen.lane_sequence, first.chosen.lane_sequence) << f << " cycle " << cycle;
      EXPECT_EQ(next.chosen.key, first.chosen.key) << f << " cycle " << cycle;
    }
  }
}

TEST(Geometry, PolygonOverlapAgreesWithSeparatingAxis)
{
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> h(-3.2, 3.2);
  for (int i = 0; i < 2000; ++i) {
    const auto a = oracle::oriented_box(u(rng), u(rng), h(rng), 4.5, 1.8);
    const auto b = oracle::oriented_box(u(rng), u(rng), h(rng), 4.5, 1.8);
    EXPECT_EQ(polygons_overlap(a, b), oracle::convex_overlap(a, b)) << i;
  }
}

}  // namespace
}  // namespace mplan
