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

#include "mplan/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "mplan/errors.hpp"

namespace mplan
{

namespace
{

constexpr double kParamTol = 1e-9;

Vec2 normalized(const Vec2 & v)
{
  const double n = v.norm();
  return n > 0.0 ? v * (1.0 / n) : Vec2{0.0, 0.0};
}

Vec2 left_normal(const Vec2 & tangent) { return {-tangent.y, tangent.x}; }

Vec2 tangent_of(const Vec2 & normal) { return {normal.y, -normal.x}; }

}  // namespace

double circumscribed_curvature(const Vec2 & a, const Vec2 & b, const Vec2 & c)
{
  const Vec2 ab = b - a;
  const Vec2 bc = c - b;
  const Vec2 ca = a - c;
  const double denom = ab.norm() * bc.norm() * ca.norm();
  if (denom < 1e-12) {
    return 0.0;
  }
  return 2.0 * ab.cross(bc) / denom;
}

ReferencePath ReferencePath::build(std::span<const Vec2> polyline, double interval)
{
  if (!(interval > 0.0)) {
    throw PlanningError("interval must be positive");
  }
  if (polyline.size() < 2) {
    throw PlanningError("path too short");
  }

  std::vector<Vec2> pts;
  std::vector<double> acc;
  pts.reserve(polyline.size());
  acc.reserve(polyline.size());
  for (const auto & p : polyline) {
    if (!pts.empty()) {
      const double seg = (p - pts.back()).norm();
      if (seg < 1e-12) {
        continue;
      }
      acc.push_back(acc.back() + seg);
    } else {
      acc.push_back(0.0);
    }
    pts.push_back(p);
  }
  const double total = acc.back();
  if (pts.size() < 2 || total + 1e-12 < interval) {
    throw PlanningError("path too short");
  }

  const auto count = static_cast<std::size_t>(std::floor(total / interval + 1e-9)) + 1;
  ReferencePath path;
  path.interval_ = interval;
  path.points_.resize(count);

  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = static_cast<double>(k) * interval;
    while (seg + 2 < pts.size() && acc[seg + 1] < s) {
      ++seg;
    }
    const double len = acc[seg + 1] - acc[seg];
    const double t = std::clamp((s - acc[seg]) / len, 0.0, 1.0);
    path.points_[k].pos = pts[seg] + (pts[seg + 1] - pts[seg]) * t;
    path.points_[k].s = s;
  }

  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == count ? k : k + 1;
    const Vec2 tangent = normalized(path.points_[hi].pos - path.points_[lo].pos);
    path.points_[k].normal = left_normal(tangent);
  }

  if (count >= 3) {
    for (std::size_t k = 1; k + 1 < count; ++k) {
      path.points_[k].curvature = circumscribed_curvature(
        path.points_[k - 1].pos, path.points_[k].pos, path.points_[k + 1].pos);
    }
    path.points_.front().curvature = path.points_[1].curvature;
    path.points_.back().curvature = path.points_[count - 2].curvature;
  }
  return path;
}

ReferencePath ReferencePath::offset(double d) const
{
  std::vector<Vec2> shifted;
  shifted.reserve(points_.size());
  for (const auto & p : points_) {
    shifted.push_back(p.pos + p.normal * d);
  }
  auto out = build(shifted, interval_);
  out.lateral_gate_ = lateral_gate_;
  return out;
}

std::size_t ReferencePath::bisect_foot(std::size_t lo, std::size_t hi, const Vec2 & p) const
{
  // Tangential offset is positive before the foot point and negative after.
  auto along = [&](std::size_t i) {
    return tangent_of(points_[i].normal).dot(p - points_[i].pos);
  };
  if (along(lo) <= 0.0) {
    return lo;
  }
  if (along(hi) > 0.0) {
    return hi;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (along(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double dl = (p - points_[lo].pos).norm();
  const double dh = (p - points_[hi].pos).norm();
  return dh < dl ? hi : lo;
}

std::size_t ReferencePath::nearest_index(const Vec2 & p) const
{
  const std::size_t n = points_.size();
  const auto stride = std::max<std::size_t>(
    1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));

  // Coarse pass: keep the three closest stride anchors.
  std::array<std::pair<double, std::size_t>, 3> best;
  best.fill({std::numeric_limits<double>::infinity(), 0});
  auto consider = [&](std::size_t i) {
    const double d2 = (p - points_[i].pos).dot(p - points_[i].pos);
    for (std::size_t b = 0; b < best.size(); ++b) {
      if (d2 < best[b].first) {
        for (std::size_t m = best.size() - 1; m > b; --m) {
          best[m] = best[m - 1];
        }
        best[b] = {d2, i};
        break;
      }
    }
  };
  for (std::size_t i = 0; i < n; i += stride) {
    consider(i);
  }
  if ((n - 1) % stride != 0) {
    consider(n - 1);
  }

  std::size_t arg = 0;
  double arg_d2 = std::numeric_limits<double>::infinity();
  for (const auto & [d2, anchor] : best) {
    if (!std::isfinite(d2)) {
      continue;
    }
    const std::size_t lo = anchor >= stride ? anchor - stride : 0;
    const std::size_t hi = std::min(n - 1, anchor + stride);
    std::size_t i = bisect_foot(lo, hi, p);
    // Settle on a discrete local minimum.
    auto dist2 = [&](std::size_t j) { return (p - points_[j].pos).dot(p - points_[j].pos); };
    while (true) {
      if (i > 0 && dist2(i - 1) < dist2(i)) {
        --i;
      } else if (i + 1 < n && dist2(i + 1) < dist2(i)) {
        ++i;
      } else {
        break;
      }
    }
    if (dist2(i) < arg_d2) {
      arg_d2 = dist2(i);
      arg = i;
    }
  }
  return arg;
}

ReferencePath::SegmentFoot ReferencePath::solve_on_segment(std::size_t i, const Vec2 & p) const
{
  // Solve for t in [0, 1] such that p - lerp(pos, t) is parallel to lerp(normal, t).
  const Vec2 & a = points_[i].pos;
  const Vec2 e = points_[i + 1].pos - a;
  const Vec2 & na = points_[i].normal;
  const Vec2 dn = points_[i + 1].normal - na;
  const Vec2 w = p - a;

  const double qa = -e.cross(dn);
  const double qb = w.cross(dn) - e.cross(na);
  const double qc = w.cross(na);

  std::array<double, 2> roots{};
  std::size_t nroots = 0;
  if (std::abs(qa) < 1e-12) {
    if (std::abs(qb) > 1e-15) {
      roots[nroots++] = -qc / qb;
    }
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // Numerically stable pair.
      const double q = -0.5 * (qb + std::copysign(sq, qb));
      if (std::abs(q) > 1e-300) {
        roots[nroots++] = q / qa;
        roots[nroots++] = qc / q;
      } else {
        roots[nroots++] = -qb / (2.0 * qa);
      }
    }
  }

  SegmentFoot out;
  for (std::size_t r = 0; r < nroots; ++r) {
    const double t = roots[r];
    if (t < -kParamTol || t > 1.0 + kParamTol) {
      continue;
    }
    const double tc = std::clamp(t, 0.0, 1.0);
    const Vec2 foot = a + e * tc;
    const Vec2 nrm = normalized(na + dn * tc);
    const double dist2 = (p - foot).dot(p - foot);
    if (!out.valid || dist2 < out.dist2) {
      out = {true, tc, (p - foot).dot(nrm), dist2};
    }
  }
  return out;
}

FrenetPoint ReferencePath::to_frenet(const Vec2 & p) const
{
  const std::size_t n = points_.size();
  const std::size_t i = nearest_index(p);

  FrenetPoint best;
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t seg : {i > 0 ? i - 1 : i, i}) {
    if (seg + 1 >= n) {
      continue;
    }
    const auto foot = solve_on_segment(seg, p);
    if (foot.valid && foot.dist2 < best_d2) {
      best_d2 = foot.dist2;
      best = {points_[seg].s + foot.t * interval_, foot.d, false};
      found = true;
    }
  }

  if (!found) {
    const auto & q = points_[i];
    const double along = tangent_of(q.normal).dot(p - q.pos);
    best = {q.s, (p - q.pos).dot(q.normal), false};
    if ((i == 0 && along < 0.0) || (i + 1 == n && along > 0.0)) {
      best.extrapolated = true;
    }
  }
  if (std::abs(best.d) > lateral_gate_) {
    throw PlanningError("point outside lateral gate of reference path");
  }
  return best;
}

std::size_t ReferencePath::segment_index(double s, double & frac) const
{
  const double len = length();
  if (s < -1e-9 || s > len + 1e-9) {
    throw PlanningError("arc length outside reference path");
  }
  s = std::clamp(s, 0.0, len);
  auto it = std::upper_bound(
    points_.begin(), points_.end(), s,
    [](double v, const ReferencePathPoint & q) { return v < q.s; });
  std::size_t seg = it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
  if (seg + 1 >= points_.size()) {
    seg = points_.size() - 2;
  }
  frac = std::clamp((s - points_[seg].s) / interval_, 0.0, 1.0);
  return seg;
}

Vec2 ReferencePath::to_cartesian(double s, double d) const
{
  double t = 0.0;
  const std::size_t i = segment_index(s, t);
  const auto & a = points_[i];
  const auto & b = points_[i + 1];
  const double rho = a.curvature + (b.curvature - a.curvature) * t;
  if (std::abs(d * rho) >= 1.0) {
    throw PlanningError("offset exceeds curvature radius");
  }
  const Vec2 foot = a.pos + (b.pos - a.pos) * t;
  const Vec2 nrm = normalized(a.normal + (b.normal - a.normal) * t);
  return foot + nrm * d;
}

double ReferencePath::curvature_at(double s) const
{
  double t = 0.0;
  const std::size_t i = segment_index(s, t);
  return points_[i].curvature + (points_[i + 1].curvature - points_[i].curvature) * t;
}

Vec2 ReferencePath::normal_at(double s) const
{
  double t = 0.0;
  const std::size_t i = segment_index(s, t);
  return normalized(points_[i].normal + (points_[i + 1].normal - points_[i].normal) * t);
}

Vec2 ReferencePath::tangent_at(double s) const { return tangent_of(normal_at(s)); }

double ReferencePath::max_abs_curvature(double s0, double s1) const
{
  double best = 0.0;
  for (const auto & q : points_) {
    if (q.s + interval_ < s0 || q.s - interval_ > s1) {
      continue;
    }
    best = std::max(best, std::abs(q.curvature));
  }
  return best;
}

}  // namespace mplan
