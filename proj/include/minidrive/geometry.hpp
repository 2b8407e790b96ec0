// Copyright 2026 The minidrive Authors
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

#ifndef MINIDRIVE_GEOMETRY_HPP_
#define MINIDRIVE_GEOMETRY_HPP_

#include "minidrive/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace minidrive
{

using Polyline = std::vector<Vec2>;
/// Closed polygon; the closing edge from back() to front() is implicit.
using Polygon = std::vector<Vec2>;

/// Rectangle of `length` along `heading` and `width` across it, centered on `center`.
struct OrientedBox
{
  Vec2 center{Vec2::Zero()};
  double heading{0.0};
  double length{0.0};
  double width{0.0};

  Vec2 axis() const { return {std::cos(heading), std::sin(heading)}; }
  Vec2 normal() const { return {-std::sin(heading), std::cos(heading)}; }

  /// Corners in counter-clockwise order starting front-left.
  std::array<Vec2, 4> corners() const
  {
    const Vec2 a = 0.5 * length * axis();
    const Vec2 n = 0.5 * width * normal();
    return {center + a + n, center - a + n, center - a - n, center + a - n};
  }
};

/// Distance from p to the segment [a, b].
inline double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq == 0.0) {
    return (p - a).norm();
  }
  const double s = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

/// Distance from p to a polyline (a single point counts as a degenerate polyline).
inline double point_polyline_distance(const Vec2 & p, const Polyline & line)
{
  if (line.empty()) {
    throw InvalidInputError("polyline must be non-empty");
  }
  if (line.size() == 1) {
    return (p - line.front()).norm();
  }
  double best = INFINITY;
  for (size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  }
  return best;
}

/// Even-odd point-in-polygon test.
inline bool point_in_polygon(const Vec2 & p, const Polygon & poly)
{
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 & a = poly[i];
    const Vec2 & b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

}  // namespace minidrive

#endif  // MINIDRIVE_GEOMETRY_HPP_
