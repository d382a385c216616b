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

// Scripted inputs shared by the tests and the acceptance gate.

#ifndef MPLAN_TESTS_SCENES_HPP_
#define MPLAN_TESTS_SCENES_HPP_

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mplan/corridor.hpp"
#include "mplan/route.hpp"
#include "mplan/world.hpp"
#include "oracles.hpp"

namespace mplan::scenes
{

std::filesystem::path scenario_path(const std::string & file);

/// Straight road along +x with lanes given as (id, d_center, width), right
/// to left.
Road straight_road(double length, const std::vector<Lane> & lanes);

/// Section label "s<band><index>" as used in the layout tests.
std::string section_label(const Section & s);

/// Two 4 m lanes cut into five bands each with the blockages described in
/// the corridor test; the ego sits in band 2 at s = 0.
StaticTopology two_lane_layout_topology();

/// Labels of the terminal sections of a topology, the root included.
std::set<std::string> terminal_labels(const StaticTopology & topo);

/// Random occupancy grid with `rows` x `cols` cells, density in [0, 1); the
/// cell (root_row, 0) is kept free.
oracle::Grid random_grid(std::mt19937_64 & rng, int rows, int cols, double density, int root_row);

/// Rasterizes `grid` onto a straight single-lane road (1 m bands, 2 m cells)
/// and returns the terminal sections of the library topology as
/// (band, first column).
std::set<std::pair<int, int>> library_grid_terminals(const oracle::Grid & grid, int root_row);

struct RouteScene
{
  Road road;
  VehicleState ego;
  std::vector<PredictedTrajectory> vehicles;
  DynamicTopology topology;
};

/// Three-lane scene with 1-8 vehicles; regenerated until the topology
/// builds.
RouteScene random_route_scene(std::mt19937_64 & rng);

}  // namespace mplan::scenes

#endif  // MPLAN_TESTS_SCENES_HPP_
