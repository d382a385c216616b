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

#ifndef MPLAN_GEOMETRY_HPP_
#define MPLAN_GEOMETRY_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mplan
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  double cross(const Vec2 & o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2 &) const = default;
};

/// Sample of an arc-length parameterized reference path.
struct ReferencePathPoint
{
  Vec2 pos;
  Vec2 normal;       // unit, left-hand perpendicular of the local tangent
  double s{0.0};     // accumulated arc length [m]
  double curvature{0.0};  // signed, positive when turning left [1/m]
};

/// Curvilinear coordinates of a Cartesian point.
struct FrenetPoint
{
  double s{0.0};
  double d{0.0};
  bool extrapolated{false};  // query projected beyond a path end; s clamped
};

/**
 * Fixed-interval reference path used as the curvilinear backbone.
 *
 * Points are spaced exactly `interval()` apart in arc length. Cartesian to
 * curvilinear lookup uses a coarse pass over the samples followed by a
 * bisection on the sign of the tangential offset, then an exact solve on the
 * two segments adjacent to the foot point. The inverse uses linear
 * interpolation of positions and normals, and the forward solve is built to
 * invert it exactly.
 */
class ReferencePath
{
public:
  static constexpr double kDefaultInterval = 0.5;
  static constexpr double kDefaultLateralGate = 50.0;

  /// Resample `polyline` at `interval` spacing. Throws PlanningError
  /// "path too short" when the total length is below one interval.
  static ReferencePath build(std::span<const Vec2> polyline, double interval = kDefaultInterval);

  /// Offset every sample by `d` along its normal and rebuild.
  ReferencePath offset(double d) const;

  FrenetPoint to_frenet(const Vec2 & p) const;
  Vec2 to_cartesian(double s, double d) const;

  /// Index of the sample nearest to `p`.
  std::size_t nearest_index(const Vec2 & p) const;

  double curvature_at(double s) const;
  Vec2 normal_at(double s) const;
  Vec2 tangent_at(double s) const;
  /// Largest |curvature| on [s0, s1].
  double max_abs_curvature(double s0, double s1) const;

  const std::vector<ReferencePathPoint> & points() const { return points_; }
  double interval() const { return interval_; }
  double length() const { return points_.back().s; }
  double lateral_gate() const { return lateral_gate_; }
  void set_lateral_gate(double gate) { lateral_gate_ = gate; }

  /// Empty path, for default-constructed aggregates; build() before use.
  ReferencePath() = default;

private:

  struct SegmentFoot
  {
    bool valid{false};
    double t{0.0};
    double d{0.0};
    double dist2{0.0};
  };
  SegmentFoot solve_on_segment(std::size_t i, const Vec2 & p) const;
  std::size_t bisect_foot(std::size_t lo, std::size_t hi, const Vec2 & p) const;
  std::size_t segment_index(double s, double & frac) const;

  std::vector<ReferencePathPoint> points_;
  double interval_{kDefaultInterval};
  double lateral_gate_{kDefaultLateralGate};
};

/// Signed curvature of the circle through three points; zero when collinear.
double circumscribed_curvature(const Vec2 & a, const Vec2 & b, const Vec2 & c);

}  // namespace mplan

#endif  // MPLAN_GEOMETRY_HPP_
