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

// Command-line front end: `plan run` drives a closed-loop simulation and
// writes artifacts, `plan check` only validates a scenario file.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mplan/errors.hpp"
#include "mplan/output.hpp"
#include "mplan/scenario.hpp"
#include "mplan/simulation.hpp"

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitCollision = 3;

void setup_logging()
{
  auto logger = spdlog::stderr_color_mt("plan");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char * env = std::getenv("PLAN_LOG_LEVEL")) {
    level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      level = spdlog::level::warn;
      spdlog::warn("unknown PLAN_LOG_LEVEL '{}', using warn", env);
    }
  }
  spdlog::set_level(level);
}

struct RunArgs
{
  std::string scenario;
  std::string out;
  std::optional<double> replan_period;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  bool plots{false};
};

int run(const RunArgs & args)
{
  mplan::Scenario sc = mplan::load_scenario(args.scenario);
  if (args.seed) {
    sc.run.seed = *args.seed;
  }
  if (args.replan_period) {
    if (!(*args.replan_period >= sc.run.sim_step)) {
      throw mplan::ScenarioError(
        "--replan-period", fmt::format("must be at least the simulation step {}", sc.run.sim_step));
    }
    sc.run.replan_period = *args.replan_period;
  }
  if (args.horizon) {
    const int steps = static_cast<int>(std::lround(*args.horizon / sc.planner.dt));
    if (steps < 4) {
      throw mplan::ScenarioError("--horizon", "must cover at least 4 planning steps");
    }
    sc.planner.steps = steps;
  }
  mplan::populate_traffic(sc, sc.run.seed);

  mplan::OutputWriter writer(args.out, args.plots);
  mplan::SimulationOptions opts;
  opts.replan_period = sc.run.replan_period;
  opts.on_cycle = [&writer](const mplan::PlanningInput & in, const mplan::PlanningResult & res) {
    writer.add_cycle(in, res);
  };
  spdlog::info(
    "running '{}' for {:.2f}s (replan {:.3f}s, horizon {} x {:.2f}s, {} vehicles)", sc.name,
    sc.run.duration, sc.run.replan_period, sc.planner.steps, sc.planner.dt, sc.vehicles.size());
  const auto sim = mplan::run_simulation(sc, opts);
  writer.finish(sc.name, sim);

  std::cout << fmt::format(
    "{}: {} cycles, {} emergency, {}\n", sc.name, sim.cycles.size(), sim.emergency_cycles,
    sim.collision ? fmt::format("COLLISION at t={:.2f}s ({})", sim.collision_time,
                                sim.collision_reason)
                  : std::string("no collision"));
  return sim.collision ? kExitCollision : kExitOk;
}

int check(const std::string & path)
{
  const auto sc = mplan::load_scenario(path);
  std::cout << fmt::format(
    "{}: valid ({} lanes, {} vehicles, {} obstacles)\n", sc.name, sc.road.lanes.size(),
    sc.vehicles.size(), sc.obstacles.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  setup_logging();
  CLI::App app{"Maneuver planner simulation harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto * run_cmd = app.add_subcommand("run", "Simulate a scenario and write artifacts");
  run_cmd->add_option("scenario", run_args.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();
  run_cmd->add_option("--replan-period", run_args.replan_period, "Replanning period [s]");
  run_cmd->add_option("--horizon", run_args.horizon, "Planning horizon [s]");
  run_cmd->add_option("--seed", run_args.seed, "Seed for generated traffic");
  run_cmd->add_flag("--plots", run_args.plots, "Write per-cycle files and SVG plots");

  std::string check_path;
  auto * check_cmd = app.add_subcommand("check", "Validate a scenario file");
  check_cmd->add_option("scenario", check_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (run_cmd->parsed()) {
      return run(run_args);
    }
    return check(check_path);
  } catch (const mplan::ScenarioError & e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const mplan::OutputError & e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
