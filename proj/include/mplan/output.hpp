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

#ifndef MPLAN_OUTPUT_HPP_
#define MPLAN_OUTPUT_HPP_

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mplan/planner.hpp"
#include "mplan/simulation.hpp"

namespace mplan
{

class OutputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Column order of every metrics CSV; mirrors CycleMetrics.
inline constexpr const char * kMetricsHeader =
  "cycle,time,t_static_topology,t_dynamic_topology,t_optimization,maneuver_count,selected_id,"
  "route_count,corridor_count,emergency";
inline constexpr const char * kTrajectoryHeader = "t,s,d,x,y,v,a,jerk";
inline constexpr const char * kTraceHeader = "t,s,d,x,y,heading,v,a,jerk";
inline constexpr const char * kActorsHeader = "t,id,s,d,x,y,heading,length,width";

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path & path, const std::string & content);

std::string metrics_csv(std::span<const CycleMetrics> cycles);
/// One row per sample (N + 1); t starts at `t0`.
std::string trajectory_csv(const Trajectory & trajectory, const Road & road, double t0);
std::string trace_csv(std::span<const TraceSample> trace);
std::string actors_csv(std::span<const TraceSample> trace);
/// Cycle dump: profiles, routes, corridors and maneuvers (single-line JSON).
std::string cycle_json(const PlanningResult & result, bool pretty = false);
/// s-t view of the trajectory profiles and d-s view of the corridors.
std::string cycle_svg(const PlanningResult & result, const Road & road, const VehicleState & ego);

/// The four per-cycle files: trajectory.csv, maneuvers.json, metrics.csv,
/// plot.svg.
void write_cycle_files(
  const std::filesystem::path & dir, const PlanningInput & input, const PlanningResult & result);

/**
 * Output directory layout:
 *   metrics.csv, trace.csv, actors.csv, maneuvers.jsonl, summary.json and,
 *   with plots enabled, cycles/NNNNNN/ with the per-cycle files.
 */
class OutputWriter
{
public:
  /// Creates `dir` and verifies that it is writable; throws OutputError.
  OutputWriter(std::filesystem::path dir, bool plots);

  void add_cycle(const PlanningInput & input, const PlanningResult & result);
  void finish(const std::string & scenario_name, const SimulationResult & sim);

private:
  std::filesystem::path dir_;
  bool plots_;
  std::string jsonl_;
};

}  // namespace mplan

#endif  // MPLAN_OUTPUT_HPP_
