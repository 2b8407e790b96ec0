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

#ifndef MINIDRIVE_METRICS_HPP_
#define MINIDRIVE_METRICS_HPP_

#include "minidrive/common.hpp"
#include "minidrive/geometry.hpp"
#include "minidrive/scenario.hpp"
#include "minidrive/sim_loop.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <vector>

namespace minidrive
{

/// Evaluation horizons in seconds.
inline constexpr std::array<double, 5> kHorizons{0.5, 1.0, 2.0, 3.0, 4.0};

/// Frame index of a horizon in seconds; throws DomainError unless it lands
/// exactly on a frame in 1..40.
int horizon_frames(double seconds);

/// Euclidean averages in meters, or literal mean squared distances.
enum class Averaging
{
  euclidean,
  squared,
};

/// Average over frames 1..horizon and the value at the horizon frame.
struct DisplacementError
{
  double average{0.0};
  double final{0.0};
};

/// ADE/FDE. Row k of pred and ref is the position at frame k + 1.
DisplacementError ade_fde(
  const Waypoints & pred, const Waypoints & ref, int horizon_frames,
  Averaging averaging = Averaging::euclidean);

/// ADR/FDR: distance of each predicted position to the closest reference
/// waypoint, irrespective of time.
DisplacementError adr_fdr(
  const Waypoints & pred, const Polyline & ref, int horizon_frames,
  Averaging averaging = Averaging::euclidean);

struct ClosedLoopMetrics
{
  double l2{0.0};
  double cr{0.0};  // fraction of scenes with a collision
  double or_rate{0.0};  // fraction of scenes going off-road
  int scenes{0};
};

/// references[i][k] is the logged ego position matching traces[i].frames[k].
ClosedLoopMetrics closed_loop_metrics(
  const std::vector<SimTrace> & traces, const std::vector<std::vector<Vec2>> & references,
  int horizon_frames, Averaging averaging = Averaging::euclidean);

/// Logged ego positions of frames first..first+count-1.
std::vector<Vec2> logged_positions(const Scenario & scenario, int first, int count);

/// One open-loop sample: a decision next to the logged future, both in the
/// ego frame of the decision instant.
struct OpenLoopSample
{
  Waypoints decision;
  Waypoints reference;
};

/// Metric x horizon table with a trailing average column.
struct MetricReport
{
  static constexpr std::array<const char *, 7> kMetricNames{
    "ADE", "FDE", "FDR", "ADR", "L2", "CR", "OR"};

  std::vector<double> horizons;  // seconds
  /// values[m][h] for metric m at horizon h.
  std::array<std::vector<double>, 7> values;
  int scenes{0};
  int failed_scenes{0};
  Averaging averaging{Averaging::euclidean};

  double average(int metric) const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Builds the report at every horizon in `horizons` (seconds).
MetricReport build_report(
  const std::vector<OpenLoopSample> & open_loop, const std::vector<SimTrace> & traces,
  const std::vector<std::vector<Vec2>> & references, const std::vector<double> & horizons,
  Averaging averaging = Averaging::euclidean);

}  // namespace minidrive

#endif  // MINIDRIVE_METRICS_HPP_
