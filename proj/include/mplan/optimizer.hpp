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

#ifndef MPLAN_OPTIMIZER_HPP_
#define MPLAN_OPTIMIZER_HPP_

#include <span>
#include <vector>

#include "mplan/config.hpp"
#include "mplan/corridor.hpp"
#include "mplan/least_squares.hpp"
#include "mplan/route.hpp"
#include "mplan/world.hpp"

namespace mplan
{

/// Forward differences of a uniformly sampled sequence: sizes n-1, n-2, n-3.
struct Differences
{
  std::vector<double> v;
  std::vector<double> a;
  std::vector<double> jerk;
};

Differences forward_differences(std::span<const double> x, double dt);

struct Trajectory
{
  double dt{0.25};
  std::vector<double> s;
  std::vector<double> d;

  std::size_t size() const { return s.size(); }
  double duration() const { return dt * static_cast<double>(s.size() - 1); }
};

/**
 * Quadratic tracking cost over samples x_0..x_N:
 *   sum_k w_pos[k] (x_k - pos_target[k])^2
 * + sum_k w_vel[k] (v_k - vel_target[k])^2   (v_N by backward difference)
 * + sum_k w_acc[k] a_k^2                     (k <= N-2)
 * + sum_k w_jerk[k] j_k^2                    (k <= N-3)
 * with forward-difference v, a, j. Both the longitudinal and the lateral
 * problems are instances of this form.
 */
struct TrackingProblem
{
  double dt{0.25};
  std::vector<double> pos_target;
  std::vector<double> pos_weight;
  std::vector<double> vel_target;
  std::vector<double> vel_weight;
  std::vector<double> acc_weight;
  std::vector<double> jerk_weight;

  explicit TrackingProblem(int steps = 0, double dt_ = 0.25);
  int steps() const { return static_cast<int>(pos_target.size()) - 1; }
  int num_residuals() const;
  void residuals(const Eigen::VectorXd & x, Eigen::VectorXd & r, Eigen::MatrixXd * jac) const;
  double cost(const Eigen::VectorXd & x) const;
};

struct TrackingSolution
{
  std::vector<double> x;
  SolveReport report;
};

/// Solves the tracking problem with the damped least-squares routine.
TrackingSolution solve_tracking(
  const TrackingProblem & problem, std::span<const double> initial, const SolverTolerances & tol);

struct LongitudinalLimits
{
  double v_acc{0.0};     // curvature speed cap
  double v_end{0.0};     // target end speed
  double s_end_bound{0.0};  // end-pose upper bound from the end profile
  double s_end{0.0};     // chosen end-pose target
  double l_extra{0.0};
  bool stop{false};      // end bounded by a static limit: plan to stand still
};

/// v_acc = sqrt(a_cen / rho); infinite-radius roads give v_max.
double curvature_speed_limit(double a_cen, double max_abs_curvature, double v_max);
/// min(v_acc, max(v_sig, v - N * a_dec)), clipped to v_max.
double end_speed_target(double v_acc, double v_sig, double v, int steps, double a_dec, double v_max);
double extra_distance(double alpha_extra, double v, double extra_min);
/// s_N - (v * t_delay + L_extra + L_v).
double end_pose_bound(double s_n, double v, double t_delay, double l_extra, double vehicle_length);

/// Everything the two-stage solve needs about one maneuver.
struct ManeuverContext
{
  const Road * road{nullptr};
  const Corridor * corridor{nullptr};
  const Route * route{nullptr};
  const ProfileSet * profiles{nullptr};
  const BaseProfile * base{nullptr};
  std::span<const PredictedTrajectory> vehicles;
  VehicleState ego;
  double ego_lateral_velocity{0.0};
  const MobilityModel * mobility{nullptr};
  double v_sig{0.0};
  double dt{0.25};
  int steps{40};
};

LongitudinalLimits longitudinal_limits(const ManeuverContext & ctx, const OptimizerConfig & cfg);

/// Per-step s interval the route allows (source, overlap during the
/// transition, target afterwards).
struct ActiveInterval
{
  std::vector<double> lower;
  std::vector<double> upper;
};
ActiveInterval active_interval(const ManeuverContext & ctx);

std::vector<double> init_longitudinal(
  const ManeuverContext & ctx, const LongitudinalLimits & limits, const ActiveInterval & active);

TrackingProblem longitudinal_problem(
  const ManeuverContext & ctx, const LongitudinalLimits & limits, std::span<const double> guess,
  const OptimizerConfig & cfg);

struct LateralGuess
{
  std::vector<double> d;
  std::vector<double> lower;  // center-line bounds after vehicle half width
  std::vector<double> upper;
  bool tight{false};
};

LateralGuess init_lateral(
  const ManeuverContext & ctx, std::span<const double> s, const OptimizerConfig & cfg);

TrackingProblem lateral_problem(
  const ManeuverContext & ctx, const LateralGuess & guess, const OptimizerConfig & cfg);

struct OptimizationResult
{
  Trajectory trajectory;
  LongitudinalLimits limits;
  SolveReport longitudinal;
  SolveReport lateral;
  int feasibility_rounds{0};
  int longitudinal_violations{0};  // steps outside the active interval
  int lateral_violations{0};       // steps outside the lateral bounds
  bool lateral_tight{false};
};

/// Longitudinal solve, then lateral solve guided by the corridor and windows.
OptimizationResult optimize_maneuver(const ManeuverContext & ctx, const OptimizerConfig & cfg);

}  // namespace mplan

#endif  // MPLAN_OPTIMIZER_HPP_
