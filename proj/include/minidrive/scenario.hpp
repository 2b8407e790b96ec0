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

#ifndef MINIDRIVE_SCENARIO_HPP_
#define MINIDRIVE_SCENARIO_HPP_

#include "minidrive/common.hpp"
#include "minidrive/flat_vehicle.hpp"
#include "minidrive/geometry.hpp"
#include "minidrive/static_map.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace minidrive
{

inline constexpr int kScenarioSchemaVersion = 1;
/// Scenarios shorter than this many frames (24 s) are dropped by extraction.
inline constexpr int kMinScenarioFrames = 240;

enum class AgentKind
{
  vehicle,
  pedestrian,
};

struct AgentPose
{
  Vec2 position{Vec2::Zero()};
  double heading{0.0};
  bool operator==(const AgentPose &) const = default;
};

/// Logged agent; `poses[f]` is empty on frames where the agent is absent.
struct AgentTrack
{
  std::string id;
  AgentKind kind{AgentKind::vehicle};
  double length{4.5};
  double width{1.9};
  std::vector<std::optional<AgentPose>> poses;

  std::optional<OrientedBox> box_at(int frame) const;
  bool operator==(const AgentTrack &) const = default;
};

enum class LightState
{
  red,
  yellow,
  green,
};

/// Traffic light metadata. Not rasterized.
struct TrafficLight
{
  std::string id;
  Vec2 position{Vec2::Zero()};
  /// (first frame, state) pairs sorted by frame; the first entry starts at frame 0.
  std::vector<std::pair<int, LightState>> schedule;

  LightState state_at(int frame) const;
  bool operator==(const TrafficLight &) const = default;
};

struct Scenario
{
  std::string id;
  double dt{kFrameDt};
  std::vector<VehicleState> ego_log;
  std::vector<AgentTrack> agents;
  StaticMap map;
  std::vector<TrafficLight> traffic_lights;

  int num_frames() const { return static_cast<int>(ego_log.size()); }
  /// Boxes of every agent present at `frame`.
  std::vector<OrientedBox> agent_boxes(int frame) const;
};

bool operator==(const Scenario & a, const Scenario & b);

/// Where a raster of a training record lives; resolved by the extract command.
struct RasterRef
{
  std::string scenario_id;
  int frame{0};
  std::string kind;  // "bev" (composed) or "env" (static channel only)

  std::string path() const;
};

struct TrainingRecord
{
  std::string scenario_id;
  int frame{0};
  Waypoints target_positions;
  RasterRef current_bev;
  RasterRef next_bev;
  RasterRef next_env;
};

/// Parses one scenario from JSON Lines. `name` labels parse errors.
Scenario parse_scenario(std::istream & is, const std::string & name);
Scenario load_scenario_file(const std::filesystem::path & file);
/// Every *.jsonl file of `dir`, sorted by file name.
std::vector<Scenario> load_scenarios(const std::filesystem::path & dir);

void write_scenario(const Scenario & scenario, std::ostream & os);
void save_scenario(const Scenario & scenario, const std::filesystem::path & file);

/// Ego positions at frames f+1..f+40 in the ego frame at f.
Waypoints ego_frame_future(const Scenario & scenario, int frame);

/// Drops scenarios under kMinScenarioFrames and emits one record per frame
/// with a full 40-frame future.
std::vector<TrainingRecord> filter_and_extract(const std::vector<Scenario> & scenarios);

/// Log positions from `first_frame` to the end.
Polyline ego_path(const Scenario & scenario, int first_frame = 0);

std::string to_string(AgentKind kind);
std::string to_string(LightState state);

}  // namespace minidrive

#endif  // MINIDRIVE_SCENARIO_HPP_
