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

#ifndef MINIDRIVE_STATIC_MAP_HPP_
#define MINIDRIVE_STATIC_MAP_HPP_

#include "minidrive/geometry.hpp"

#include <vector>

namespace minidrive
{

/// Static road structure in world meters.
struct StaticMap
{
  std::vector<Polyline> lanes;  // each with >= 2 points
  std::vector<Polygon> drivable_areas;
  std::vector<Polygon> intersections;

  bool empty() const { return lanes.empty() && drivable_areas.empty() && intersections.empty(); }
  bool operator==(const StaticMap &) const = default;
};

}  // namespace minidrive

#endif  // MINIDRIVE_STATIC_MAP_HPP_
