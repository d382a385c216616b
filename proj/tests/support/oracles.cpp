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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mplan::oracle
{

namespace
{

struct Operators
{
  Eigen::MatrixXd dv;  // forward differences, last row backward
  Eigen::MatrixXd d2;
  Eigen::MatrixXd d3;
};

Operators difference_operators(int n, double dt)
{
  Operators op;
  op.dv = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    const int i = std::min(k, n - 1);
    op.dv(k, i) = -1.0 / dt;
    op.dv(k, i + 1) = 1.0 / dt;
  }
  op.d2 = Eigen::MatrixXd::Zero(n - 1, n + 1);
  for (int k = 0; k + 2 <= n; ++k) {
    op.d2(k, k) = 1.0;
    op.d2(k, k + 1) = -2.0;
    op.d2(k, k + 2) = 1.0;
  }
  op.d2 /= dt * dt;
  op.d3 = Eigen::MatrixXd::Zero(n - 2, n + 1);
  for (int k = 0; k + 3 <= n; ++k) {
    op.d3(k, k) = -1.0;
    op.d3(k, k + 1) = 3.0;
    op.d3(k, k + 2) = -3.0;
    op.d3(k, k + 3) = 1.0;
  }
  op.d3 /= dt * dt * dt;
  return op;
}

Eigen::VectorXd head(const std::vector<double> & v, int n)
{
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = v[static_cast<std::size_t>(i)];
  }
  return out;
}

double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

Eigen::VectorXd tracking_minimizer(const TrackingProblem & problem)
{
  const int n = problem.steps();
  const auto op = difference_operators(n, problem.dt);
  const Eigen::VectorXd wp = head(problem.pos_weight, n + 1);
  const Eigen::VectorXd wv = head(problem.vel_weight, n + 1);
  const Eigen::VectorXd wa = head(problem.acc_weight, n - 1);
  const Eigen::VectorXd wj = head(problem.jerk_weight, n - 2);
  const Eigen::VectorXd p = head(problem.pos_target, n + 1);
  const Eigen::VectorXd v = head(problem.vel_target, n + 1);

  Eigen::MatrixXd h = Eigen::MatrixXd(wp.asDiagonal());
  h += op.dv.transpose() * wv.asDiagonal() * op.dv;
  h += op.d2.transpose() * wa.asDiagonal() * op.d2;
  h += op.d3.transpose() * wj.asDiagonal() * op.d3;
  const Eigen::VectorXd g = wp.cwiseProduct(p) + op.dv.transpose() * wv.cwiseProduct(v);
  return h.fullPivLu().solve(g);
}

double tracking_cost(const TrackingProblem & problem, const Eigen::VectorXd & x)
{
  const int n = problem.steps();
  const auto op = difference_operators(n, problem.dt);
  const Eigen::VectorXd ep = x - head(problem.pos_target, n + 1);
  const Eigen::VectorXd ev = op.dv * x - head(problem.vel_target, n + 1);
  const Eigen::VectorXd a = op.d2 * x;
  const Eigen::VectorXd j = op.d3 * x;
  return head(problem.pos_weight, n + 1).dot(ep.cwiseAbs2()) +
         head(problem.vel_weight, n + 1).dot(ev.cwiseAbs2()) +
         head(problem.acc_weight, n - 1).dot(a.cwiseAbs2()) +
         head(problem.jerk_weight, n - 2).dot(j.cwiseAbs2());
}

TrackingProblem random_longitudinal_problem(std::mt19937_64 & rng, int steps)
{
  const double dt = uniform(rng, 0.1, 0.5);
  TrackingProblem p(steps, dt);
  const double s0 = uniform(rng, 0.0, 200.0);
  const double v0 = uniform(rng, 0.0, 20.0);
  const double v_end = uniform(rng, 0.0, 20.0);
  const double horizon = steps * dt;
  for (int k = 0; k <= steps; ++k) {
    const auto i = static_cast<std::size_t>(k);
    p.pos_target[i] = s0 + v0 * k * dt + uniform(rng, -1.0, 1.0);
    p.acc_weight[i] = uniform(rng, 0.1, 10.0);
    p.jerk_weight[i] = uniform(rng, 0.1, 10.0);
  }
  p.pos_target.front() = s0;
  p.pos_weight.front() = uniform(rng, 10.0, 1000.0);
  p.pos_target.back() = s0 + 0.5 * (v0 + v_end) * horizon;
  p.pos_weight.back() = uniform(rng, 10.0, 1000.0);
  p.vel_target.front() = v0;
  p.vel_weight.front() = uniform(rng, 10.0, 1000.0);
  p.vel_target.back() = v_end;
  p.vel_weight.back() = uniform(rng, 10.0, 1000.0);
  return p;
}

TrackingProblem random_lateral_problem(std::mt19937_64 & rng, int steps)
{
  const double dt = uniform(rng, 0.1, 0.5);
  TrackingProblem p(steps, dt);
  const double from = uniform(rng, -2.0, 2.0);
  const double to = from + (uniform(rng, 0.0, 1.0) < 0.5 ? -3.5 : 3.5);
  const int k_switch = std::uniform_int_distribution<int>(1, steps)(rng);
  const double d0 = from + uniform(rng, -0.5, 0.5);
  for (int k = 0; k <= steps; ++k) {
    const auto i = static_cast<std::size_t>(k);
    p.pos_target[i] = k < k_switch ? from : to;
    p.pos_weight[i] = uniform(rng, 1.0, 100.0);
    p.vel_weight[i] = uniform(rng, 0.1, 20.0);
    p.acc_weight[i] = uniform(rng, 0.1, 10.0);
    p.jerk_weight[i] = uniform(rng, 0.1, 10.0);
  }
  p.pos_target.front() = d0;
  p.pos_weight.front() = uniform(rng, 100.0, 1000.0);
  p.vel_target.front() = uniform(rng, -1.0, 1.0);
  p.vel_weight.front() = uniform(rng, 10.0, 100.0);
  return p;
}

Eigen::MatrixXd central_difference_jacobian(
  const VectorFunction & fn, const Eigen::VectorXd & x, double h)
{
  const Eigen::VectorXd f0 = fn(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (fn(xp) - fn(xm)) / (2.0 * h);
  }
  return jac;
}

std::vector<Vec2> random_smooth_curve(std::mt19937_64 & rng, double length, double max_curvature)
{
  // Curvature as a sum of three sinusoids scaled to stay within the bound.
  double amp[3];
  double freq[3];
  double phase[3];
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    amp[i] = uniform(rng, 0.0, 1.0);
    freq[i] = uniform(rng, 0.005, 0.05);
    phase[i] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    total += amp[i];
  }
  const double scale = total > 0.0 ? max_curvature / total : 0.0;
  const double step = 0.1;
  double heading = uniform(rng, -std::numbers::pi, std::numbers::pi);
  Vec2 p{uniform(rng, -100.0, 100.0), uniform(rng, -100.0, 100.0)};
  std::vector<Vec2> pts{p};
  for (double s = 0.0; s < length; s += step) {
    double kappa = 0.0;
    for (int i = 0; i < 3; ++i) {
      kappa += scale * amp[i] * std::sin(freq[i] * s + phase[i]);
    }
    heading += kappa * step;
    p = p + Vec2{std::cos(heading), std::sin(heading)} * step;
    pts.push_back(p);
  }
  return pts;
}

std::vector<Run> free_runs(const Grid & grid)
{
  std::vector<Run> runs;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const auto & row = grid[r];
    std::size_t c = 0;
    while (c < row.size()) {
      if (row[c]) {
        ++c;
        continue;
      }
      const std::size_t start = c;
      while (c < row.size() && !row[c]) {
        ++c;
      }
      runs.push_back({static_cast<int>(r), static_cast<int>(start), static_cast<int>(c)});
    }
  }
  return runs;
}

std::set<std::pair<int, int>> grid_bfs_terminals(const Grid & grid, int root_row)
{
  const auto runs = free_runs(grid);
  int root = -1;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].row == root_row && runs[i].col_begin == 0) {
      root = static_cast<int>(i);
    }
  }
  if (root < 0) {
    throw std::invalid_argument("root cell is occupied");
  }
  auto adjacent = [&](const Run & a, const Run & b) {
    return std::abs(a.row - b.row) == 1 &&
           std::min(a.col_end, b.col_end) - std::max(a.col_begin, b.col_begin) >= 1;
  };
  std::vector<bool> seen(runs.size(), false);
  std::deque<int> queue{root};
  seen[static_cast<std::size_t>(root)] = true;
  std::set<std::pair<int, int>> terminals{{runs[static_cast<std::size_t>(root)].row, 0}};
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    bool discovered = false;
    for (std::size_t j = 0; j < runs.size(); ++j) {
      if (!seen[j] && adjacent(runs[static_cast<std::size_t>(cur)], runs[j])) {
        seen[j] = true;
        queue.push_back(static_cast<int>(j));
        discovered = true;
      }
    }
    if (!discovered) {
      const auto & r = runs[static_cast<std::size_t>(cur)];
      terminals.insert({r.row, r.col_begin});
    }
  }
  return terminals;
}

int count_profile_chains(const ProfileSet & set, const Road & road, int max_depth)
{
  auto lane_pos = [&](int lane_id) {
    for (std::size_t i = 0; i < road.lanes.size(); ++i) {
      if (road.lanes[i].id == lane_id) {
        return static_cast<int>(i);
      }
    }
    return -100;
  };
  auto linked = [&](const TrajectoryProfile & a, const TrajectoryProfile & b) {
    if (std::abs(lane_pos(a.lane_id) - lane_pos(b.lane_id)) != 1) {
      return false;
    }
    for (int k = std::max(a.k_begin, b.k_begin); k <= std::min(a.k_end, b.k_end); ++k) {
      const auto i = static_cast<std::size_t>(k);
      if (std::min(a.upper[i], b.upper[i]) - std::max(a.lower[i], b.lower[i]) > 0.0) {
        return true;
      }
    }
    return false;
  };
  int count = 0;
  std::vector<int> chain{set.root};
  std::function<void()> extend = [&]() {
    ++count;
    if (static_cast<int>(chain.size()) >= max_depth) {
      return;
    }
    const auto & tail = set.profiles[static_cast<std::size_t>(chain.back())];
    for (const auto & p : set.profiles) {
      if (std::find(chain.begin(), chain.end(), p.id) != chain.end() || !linked(tail, p)) {
        continue;
      }
      chain.push_back(p.id);
      extend();
      chain.pop_back();
    }
  };
  extend();
  return count;
}

ConvexPolygon oriented_box(double x, double y, double heading, double length, double width)
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  ConvexPolygon out;
  for (const auto & [u, v] : {std::pair{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}) {
    out.push_back({x + c * u - s * v, y + s * u + c * v});
  }
  return out;
}

bool convex_overlap(const ConvexPolygon & a, const ConvexPolygon & b)
{
  auto separated_along_edges_of = [](const ConvexPolygon & p, const ConvexPolygon & q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Vec2 e = p[(i + 1) % p.size()] - p[i];
      const Vec2 axis{-e.y, e.x};
      double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
      for (const auto & v : p) {
        pmin = std::min(pmin, axis.dot(v));
        pmax = std::max(pmax, axis.dot(v));
      }
      for (const auto & v : q) {
        qmin = std::min(qmin, axis.dot(v));
        qmax = std::max(qmax, axis.dot(v));
      }
      if (pmax < qmin || qmax < pmin) {
        return true;
      }
    }
    return false;
  };
  return !separated_along_edges_of(a, b) && !separated_along_edges_of(b, a);
}

bool is_convex(const ConvexPolygon & p)
{
  int sign = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 a = p[(i + 1) % p.size()] - p[i];
    const Vec2 b = p[(i + 2) % p.size()] - p[(i + 1) % p.size()];
    const double c = a.cross(b);
    if (std::abs(c) < 1e-12) {
      continue;
    }
    const int s = c > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) {
      return false;
    }
    sign = s;
  }
  return true;
}

AuditReport audit_run(
  const std::filesystem::path & run_dir, double ego_length, double ego_width,
  const std::vector<ConvexPolygon> & obstacles)
{
  const auto trace = read_csv(run_dir / "trace.csv");
  const auto actors = read_csv(run_dir / "actors.csv");
  std::map<std::string, std::vector<ConvexPolygon>> actor_boxes;
  for (std::size_t i = 1; i < actors.size(); ++i) {
    const auto & r = actors[i];
    actor_boxes[r.at(0)].push_back(oriented_box(
      std::stod(r.at(4)), std::stod(r.at(5)), std::stod(r.at(6)), std::stod(r.at(7)),
      std::stod(r.at(8))));
  }
  AuditReport rep;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto & r = trace[i];
    const auto ego = oriented_box(
      std::stod(r.at(3)), std::stod(r.at(4)), std::stod(r.at(5)), ego_length, ego_width);
    ++rep.samples;
    for (std::size_t o = 0; o < obstacles.size() && rep.clean; ++o) {
      if (convex_overlap(ego, obstacles[o])) {
        rep.clean = false;
        rep.first_hit = "obstacle " + std::to_string(o) + " at t=" + r.at(0);
      }
    }
    for (const auto & box : actor_boxes[r.at(0)]) {
      if (rep.clean && convex_overlap(ego, box)) {
        rep.clean = false;
        rep.first_hit = "vehicle at t=" + r.at(0);
      }
    }
    if (!rep.clean) {
      break;
    }
  }
  return rep;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(cell);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double percentile(std::vector<double> values, double p)
{
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace mplan::oracle
