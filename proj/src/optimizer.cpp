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

#include "mplan/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mplan/errors.hpp"

namespace mplan
{

namespace
{

constexpr double kBoundTolerance = 1e-3;

double sq(double x) { return x * x; }

}  // namespace

Differences forward_differences(std::span<const double> x, double dt)
{
  Differences out;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.v.push_back((x[i + 1] - x[i]) / dt);
  }
  for (std::size_t i = 0; i + 2 < n; ++i) {
    out.a.push_back((x[i + 2] - 2.0 * x[i + 1] + x[i]) / (dt * dt));
  }
  for (std::size_t i = 0; i + 3 < n; ++i) {
    out.jerk.push_back((x[i + 3] - 3.0 * x[i + 2] + 3.0 * x[i + 1] - x[i]) / (dt * dt * dt));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tracking problem

TrackingProblem::TrackingProblem(int steps, double dt_) : dt(dt_)
{
  const auto n = static_cast<std::size_t>(std::max(steps, 0) + 1);
  pos_target.assign(n, 0.0);
  pos_weight.assign(n, 0.0);
  vel_target.assign(n, 0.0);
  vel_weight.assign(n, 0.0);
  acc_weight.assign(n, 0.0);
  jerk_weight.assign(n, 0.0);
}

int TrackingProblem::num_residuals() const
{
  const int n = steps();
  return 2 * (n + 1) + std::max(0, n - 1) + std::max(0, n - 2);
}

void TrackingProblem::residuals(
  const Eigen::VectorXd & x, Eigen::VectorXd & r, Eigen::MatrixXd * jac) const
{
  const int n = steps();
  if (n < 3 || x.size() != n + 1) {
    throw PlanningError("tracking problem needs at least four samples");
  }
  r.resize(num_residuals());
  if (jac != nullptr) {
    jac->setZero(num_residuals(), n + 1);
  }
  const double inv = 1.0 / dt;
  int row = 0;
  for (int k = 0; k <= n; ++k, ++row) {
    const double w = std::sqrt(pos_weight[static_cast<std::size_t>(k)]);
    r[row] = w * (x[k] - pos_target[static_cast<std::size_t>(k)]);
    if (jac != nullptr) {
      (*jac)(row, k) = w;
    }
  }
  for (int k = 0; k <= n; ++k, ++row) {
    const double w = std::sqrt(vel_weight[static_cast<std::size_t>(k)]);
    const int i0 = k < n ? k : n - 1;
    r[row] = w * ((x[i0 + 1] - x[i0]) * inv - vel_target[static_cast<std::size_t>(k)]);
    if (jac != nullptr) {
      (*jac)(row, i0) = -w * inv;
      (*jac)(row, i0 + 1) = w * inv;
    }
  }
  const double inv2 = inv * inv;
  for (int k = 0; k + 2 <= n; ++k, ++row) {
    const double w = std::sqrt(acc_weight[static_cast<std::size_t>(k)]);
    r[row] = w * (x[k + 2] - 2.0 * x[k + 1] + x[k]) * inv2;
    if (jac != nullptr) {
      (*jac)(row, k) = w * inv2;
      (*jac)(row, k + 1) = -2.0 * w * inv2;
      (*jac)(row, k + 2) = w * inv2;
    }
  }
  const double inv3 = inv2 * inv;
  for (int k = 0; k + 3 <= n; ++k, ++row) {
    const double w = std::sqrt(jerk_weight[static_cast<std::size_t>(k)]);
    r[row] = w * (x[k + 3] - 3.0 * x[k + 2] + 3.0 * x[k + 1] - x[k]) * inv3;
    if (jac != nullptr) {
      (*jac)(row, k) = -w * inv3;
      (*jac)(row, k + 1) = 3.0 * w * inv3;
      (*jac)(row, k + 2) = -3.0 * w * inv3;
      (*jac)(row, k + 3) = w * inv3;
    }
  }
}

double TrackingProblem::cost(const Eigen::VectorXd & x) const
{
  Eigen::VectorXd r;
  residuals(x, r, nullptr);
  return r.squaredNorm();
}

TrackingSolution solve_tracking(
  const TrackingProblem & problem, std::span<const double> initial, const SolverTolerances & tol)
{
  LeastSquaresProblem lsq;
  lsq.num_residuals = problem.num_residuals();
  lsq.residuals = [&problem](const Eigen::VectorXd & x, Eigen::VectorXd & r, Eigen::MatrixXd * j) {
    problem.residuals(x, r, j);
  };
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(initial.data(), static_cast<Eigen::Index>(initial.size()));
  TrackingSolution out;
  out.report = damped_least_squares(lsq, x, tol);
  out.x.assign(x.data(), x.data() + x.size());
  return out;
}

// ---------------------------------------------------------------------------
// Limits

double curvature_speed_limit(double a_cen, double max_abs_curvature, double v_max)
{
  if (!(max_abs_curvature > 0.0)) {
    return v_max;
  }
  return std::sqrt(a_cen / max_abs_curvature);
}

double end_speed_target(double v_acc, double v_sig, double v, int steps, double a_dec, double v_max)
{
  return std::min(v_max, std::min(v_acc, std::max(v_sig, v - steps * a_dec)));
}

double extra_distance(double alpha_extra, double v, double extra_min) { return alpha_extra * v + extra_min; }

double end_pose_bound(double s_n, double v, double t_delay, double l_extra, double vehicle_length)
{
  return s_n - (v * t_delay + l_extra + vehicle_length);
}

namespace
{

const TrajectoryProfile & profile(const ManeuverContext & ctx, int id)
{
  return ctx.profiles->profiles[static_cast<std::size_t>(id)];
}

/// Fraction of the lateral distance to the first target lane the ego has
/// already covered; zero for lane keeping.
double first_transition_progress(const ManeuverContext & ctx)
{
  const auto & chain = ctx.route->chain;
  if (ctx.route->windows.empty() || chain.size() < 2) {
    return 0.0;
  }
  const double from = ctx.road->lane_by_id(profile(ctx, chain[0]).lane_id)->d_center;
  const double to = ctx.road->lane_by_id(profile(ctx, chain[1]).lane_id)->d_center;
  if (std::abs(to - from) < 1e-9) {
    return 0.0;
  }
  return std::clamp((ctx.ego.d - from) / (to - from), 0.0, 1.0);
}

const PredictedTrajectory * vehicle_by_id(const ManeuverContext & ctx, int id)
{
  for (const auto & v : ctx.vehicles) {
    if (v.vehicle_id == id) {
      return &v;
    }
  }
  return nullptr;
}

}  // namespace

LongitudinalLimits longitudinal_limits(const ManeuverContext & ctx, const OptimizerConfig & cfg)
{
  LongitudinalLimits lim;
  const int n = ctx.steps;
  const double horizon = n * ctx.dt;
  const double v = std::max(0.0, ctx.ego.v);
  const auto & base = *ctx.base;
  const double rho = ctx.road->reference.max_abs_curvature(ctx.ego.s, base.upper.back());
  lim.v_acc = curvature_speed_limit(ctx.mobility->a_cen, rho, ctx.mobility->v_max);
  lim.v_end = end_speed_target(lim.v_acc, ctx.v_sig, v, n, ctx.mobility->a_dec, ctx.mobility->v_max);
  lim.l_extra = extra_distance(cfg.alpha_extra, v, cfg.extra_min);

  const auto & end = profile(ctx, ctx.route->chain.back());
  double s_bound = base.upper.back();
  if (end.front_vehicle >= 0) {
    if (const auto * lead = vehicle_by_id(ctx, end.front_vehicle)) {
      lim.v_end = std::min(lim.v_end, lead->states.back().v);
    }
    if (end.exists(n)) {
      s_bound = end_pose_bound(
        end.upper[static_cast<std::size_t>(n)], v, cfg.t_delay, lim.l_extra, cfg.vehicle_length);
    }
  }
  if (ctx.corridor->blocked) {
    const double s_static = ctx.corridor->s_end() - 0.5 * cfg.vehicle_length;
    if (s_static < base.upper.back()) {
      lim.stop = true;
      lim.v_end = 0.0;
      s_bound = std::min(
        s_bound, end_pose_bound(s_static, v, cfg.t_delay, lim.l_extra, cfg.vehicle_length));
    }
  }
  lim.s_end_bound = s_bound;

  double s_target = std::min(s_bound, ctx.ego.s + 0.5 * (v + lim.v_end) * horizon);
  double lo = base.lower.back();
  double hi = base.upper.back();
  if (end.exists(n)) {
    lo = std::max(lo, end.lower[static_cast<std::size_t>(n)]);
    hi = std::min(hi, end.upper[static_cast<std::size_t>(n)]);
  }
  s_target = std::clamp(s_target, lo, std::max(lo, hi));
  lim.s_end = s_target;
  return lim;
}

ActiveInterval active_interval(const ManeuverContext & ctx)
{
  const int n = ctx.steps;
  ActiveInterval out;
  out.lower.resize(static_cast<std::size_t>(n) + 1);
  out.upper.resize(static_cast<std::size_t>(n) + 1);
  const auto & chain = ctx.route->chain;
  const auto & windows = ctx.route->windows;
  // A change already under way needs only the rest of its transition.
  const double progress = first_transition_progress(ctx);
  auto transition_end = [&](std::size_t w) {
    return windows[w].br + (w == 0 ? 1.0 - progress : 1.0) * windows[w].te;
  };
  for (int k = 0; k <= n; ++k) {
    const double t = k * ctx.dt;
    const auto i = static_cast<std::size_t>(k);
    std::optional<std::pair<double, double>> iv;
    std::size_t stage = 0;
    bool in_transition = false;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      if (t >= transition_end(w)) {
        stage = w + 1;
      } else if (t >= windows[w].br) {
        stage = w;
        in_transition = true;
        break;
      } else {
        break;
      }
    }
    if (in_transition) {
      iv = profile_overlap(profile(ctx, chain[stage]), profile(ctx, chain[stage + 1]), k);
    } else {
      const auto & p = profile(ctx, chain[std::min(stage, chain.size() - 1)]);
      if (p.exists(k)) {
        iv = std::make_pair(p.lower[i], p.upper[i]);
      }
    }
    if (!iv || iv->first > iv->second) {
      iv = std::make_pair(ctx.base->lower[i], ctx.base->upper[i]);
    }
    out.lower[i] = iv->first;
    out.upper[i] = iv->second;
  }
  return out;
}

std::vector<double> init_longitudinal(
  const ManeuverContext & ctx, const LongitudinalLimits & limits, const ActiveInterval & active)
{
  const int n = ctx.steps;
  const double horizon = n * ctx.dt;
  const double s0 = ctx.ego.s;
  const double v0 = std::max(0.0, ctx.ego.v);
  std::vector<double> guess(static_cast<std::size_t>(n) + 1);
  const double dist = limits.s_end - s0;
  for (int k = 0; k <= n; ++k) {
    const double t = k * ctx.dt;
    double s = 0.0;
    if (limits.stop) {
      // Constant deceleration that stands still at the end pose.
      if (dist <= 1e-9 || v0 <= 1e-9) {
        s = s0 + std::max(0.0, dist);
      } else {
        const double a = v0 * v0 / (2.0 * dist);
        const double t_stop = v0 / a;
        s = t < t_stop ? s0 + v0 * t - 0.5 * a * t * t : s0 + dist;
      }
    } else {
      // Cubic Hermite from (s0, v0) to (s_end, v_end).
      const double u = t / horizon;
      const double h00 = 2 * u * u * u - 3 * u * u + 1;
      const double h10 = u * u * u - 2 * u * u + u;
      const double h01 = -2 * u * u * u + 3 * u * u;
      const double h11 = u * u * u - u * u;
      s = h00 * s0 + h10 * horizon * v0 + h01 * limits.s_end + h11 * horizon * limits.v_end;
    }
    const auto i = static_cast<std::size_t>(k);
    s = std::clamp(s, active.lower[i], std::max(active.lower[i], active.upper[i]));
    if (k > 0) {
      s = std::max(s, guess[i - 1]);
    }
    guess[i] = s;
  }
  guess[0] = s0;
  return guess;
}

TrackingProblem longitudinal_problem(
  const ManeuverContext & ctx, const LongitudinalLimits & limits, std::span<const double> guess,
  const OptimizerConfig & cfg)
{
  const int n = ctx.steps;
  const auto & w = cfg.weights;
  TrackingProblem p(n, ctx.dt);
  for (int k = 0; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    p.pos_target[i] = guess[i];
    p.acc_weight[i] = w.lon_accel;
    p.jerk_weight[i] = w.lon_jerk;
  }
  p.pos_target.front() = ctx.ego.s;
  p.pos_weight.front() = w.lon_start_pos;
  p.pos_target.back() = limits.s_end;
  p.pos_weight.back() = w.lon_anchor_pos;
  p.vel_target.front() = std::max(0.0, ctx.ego.v);
  p.vel_weight.front() = w.lon_anchor_vel;
  p.vel_target.back() = limits.v_end;
  p.vel_weight.back() = w.lon_anchor_vel;
  return p;
}

LateralGuess init_lateral(
  const ManeuverContext & ctx, std::span<const double> s, const OptimizerConfig & cfg)
{
  const int n = ctx.steps;
  const auto lanes = route_lanes(*ctx.route, *ctx.profiles);
  const auto & windows = ctx.route->windows;
  const auto & cor = *ctx.corridor;
  LateralGuess g;
  g.d.resize(static_cast<std::size_t>(n) + 1);
  g.lower.resize(g.d.size());
  g.upper.resize(g.d.size());
  const double dprj = cfg.d_safe_projected;
  // Switch from source to target centerline half-way through the transition.
  // When replanning mid-change the ego has already covered part of the
  // lateral distance, so the switch moves forward accordingly; otherwise a
  // receding horizon would postpone it forever.
  std::vector<double> t_switch;
  const double first_progress = first_transition_progress(ctx);
  for (std::size_t j = 0; j < windows.size(); ++j) {
    const double progress = j == 0 ? first_progress : 0.0;
    const auto & w = windows[j];
    t_switch.push_back(w.br + std::max(0.0, 0.5 - progress) * w.te);
  }
  for (int k = 0; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double t = k * ctx.dt;
    std::size_t stage = 0;
    for (double ts : t_switch) {
      if (t >= ts) {
        ++stage;
      }
    }
    const Lane * lane = ctx.road->lane_by_id(lanes[std::min(stage, lanes.size() - 1)]);
    double d = lane->d_center;

    const double s_query = std::clamp(s[i], cor.s0, std::max(cor.s0, cor.s_end() - 1e-6));
    auto b = cor.bounds_at(s_query);
    if (!b) {
      b = std::make_pair(cor.d_lower.back(), cor.d_upper.back());
    }
    const double lo = b->first + 0.5 * cfg.vehicle_width;
    const double hi = b->second - 0.5 * cfg.vehicle_width;
    g.lower[i] = lo;
    g.upper[i] = hi;
    if (hi - lo < 2.0 * dprj) {
      d = 0.5 * (lo + hi);
      g.tight = true;
    } else if (d <= lo + dprj) {
      d = lo + dprj;
    } else if (d >= hi - dprj) {
      d = hi - dprj;
    }
    g.d[i] = d;
  }
  return g;
}

TrackingProblem lateral_problem(
  const ManeuverContext & ctx, const LateralGuess & guess, const OptimizerConfig & cfg)
{
  const int n = ctx.steps;
  const auto & w = cfg.weights;
  TrackingProblem p(n, ctx.dt);
  const auto lanes = route_lanes(*ctx.route, *ctx.profiles);
  const double target_center = ctx.road->lane_by_id(lanes.back())->d_center;
  const double d0 = ctx.ego.d - target_center;
  const double w_vel = w.lat_vel_base * (1.0 + w.lat_vel_offset_gain * sq(d0));
  for (int k = 0; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    p.pos_target[i] = guess.d[i];
    p.pos_weight[i] = w.lat_pos;
    p.vel_weight[i] = w_vel;
    p.acc_weight[i] = w.lat_accel;
    p.jerk_weight[i] = w.lat_jerk;
  }
  for (int k = 1; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (std::abs(guess.d[i] - guess.d[i - 1]) > cfg.transition_threshold) {
      p.pos_weight[i] = w.lat_pos * w.lat_pos_transition_gain;
      p.pos_weight[i - 1] = w.lat_pos * w.lat_pos_transition_gain;
    }
  }
  p.pos_target.front() = ctx.ego.d;
  p.pos_weight.front() = w.lat_start_pos;
  p.vel_target.front() = ctx.ego_lateral_velocity;
  p.vel_weight.front() = w.lat_start_vel;
  return p;
}

OptimizationResult optimize_maneuver(const ManeuverContext & ctx, const OptimizerConfig & cfg)
{
  OptimizationResult out;
  const int n = ctx.steps;
  out.limits = longitudinal_limits(ctx, cfg);
  const auto active = active_interval(ctx);
  const auto guess = init_longitudinal(ctx, out.limits, active);

  auto lon = longitudinal_problem(ctx, out.limits, guess, cfg);
  TrackingSolution sol;
  for (int round = 0;; ++round) {
    sol = solve_tracking(lon, guess, cfg.tolerances);
    out.feasibility_rounds = round;
    int violations = 0;
    for (int k = 1; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const bool outside = sol.x[i] < active.lower[i] - kBoundTolerance ||
                           sol.x[i] > active.upper[i] + kBoundTolerance ||
                           sol.x[i] < sol.x[i - 1] - kBoundTolerance;
      if (outside) {
        ++violations;
        lon.pos_weight[i] += cfg.weights.feasibility_weight;
      }
    }
    out.longitudinal_violations = violations;
    if (violations == 0 || round >= cfg.weights.feasibility_rounds) {
      break;
    }
  }
  out.longitudinal = sol.report;
  std::vector<double> s = sol.x;
  for (std::size_t i = 1; i < s.size(); ++i) {
    s[i] = std::max(s[i], s[i - 1]);  // standstill, never reverse
  }

  const auto lat_guess = init_lateral(ctx, s, cfg);
  const auto lat = lateral_problem(ctx, lat_guess, cfg);
  auto lat_sol = solve_tracking(lat, lat_guess.d, cfg.tolerances);
  out.lateral = lat_sol.report;
  out.lateral_tight = lat_guess.tight;
  for (int k = 1; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (lat_sol.x[i] < lat_guess.lower[i] - kBoundTolerance ||
        lat_sol.x[i] > lat_guess.upper[i] + kBoundTolerance) {
      ++out.lateral_violations;
    }
  }

  out.trajectory.dt = ctx.dt;
  out.trajectory.s = std::move(s);
  out.trajectory.d = std::move(lat_sol.x);
  return out;
}

}  // namespace mplan
