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

#ifndef MINIDRIVE_SIM_LOOP_HPP_
#define MINIDRIVE_SIM_LOOP_HPP_

#include "minidrive/bev_raster.hpp"
#include "minidrive/min_jerk_planner.hpp"
#include "minidrive/policy.hpp"
#include "minidrive/scenario.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace minidrive
{

struct SimConfig
{
  double duration{4.0};
  double replan_period{0.1};
  double dt_sim{kFrameDt};
  VehicleParams bounds;
  bool collision{true};
  double offroad_threshold{2.0};
  int start_frame{0};
  int context_length{kContextLength};
  /// Plan to a standstill instead of finite-differencing the end velocity.
  bool zero_end_velocity{false};
  BoundsMode bounds_mode{BoundsMode::report};
  RasterSpec raster;
  /// Keep the composed raster of every frame in the trace.
  bool record_rasters{false};
  /// RK4 substep used when executing a plan.
  double exec_substep{0.01};

  void validate() const;
  int num_steps() const;
  int replan_every() const;
};

struct FrameEvents
{
  bool collision{false};
  bool offroad{false};
  bool infeasible_plan{false};
  bool operator==(const FrameEvents &) const = default;
};

struct SimFrame
{
  int frame{0};  // scenario frame
  double time{0.0};  // seconds since simulation start
  VehicleState ego;
  int plan_id{-1};  // plan being executed when this frame was reached; -1 at frame 0
  FrameEvents events;
  bool operator==(const SimFrame &) const = default;
};

struct SimTrace
{
  std::string scenario_id;
  std::vector<SimFrame> frames;
  std::vector<PiecewiseQuintic> plans;
  std::vector<Decision> decisions;
  std::vector<BevRaster> rasters;  // filled when SimConfig::record_rasters is set
  std::optional<std::string> error;

  /// Whether any frame in 0..frame_limit recorded the event.
  bool collided_within(int frame_limit) const;
  bool offroad_within(int frame_limit) const;
};

/// Policy -> minimum-jerk plan -> flatness-based execution, with agents
/// replayed from the log.
SimTrace run_closed_loop(const Scenario & scenario, Policy & policy, const SimConfig & config);

/// Planning problem for a decision taken at `ego` (waypoints at 0.1 s knots).
PlanningProblem problem_from_decision(
  const VehicleState & ego, const Decision & decision, const VehicleParams & bounds,
  bool zero_end_velocity = false);

/// Strictly positive overlap of two oriented boxes (separating axis test).
bool boxes_overlap(const OrientedBox & a, const OrientedBox & b);
bool detect_collision(const OrientedBox & ego, const std::vector<OrientedBox> & agents);
/// True iff the distance from ego_pos to the reference polyline exceeds threshold.
bool detect_offroad(const Vec2 & ego_pos, const Polyline & reference, double threshold = 2.0);

/// Static channel only.
BevRaster render_env(const StaticMap & map, const VehicleState & view_pose, const RasterSpec & spec);
/// Env + agents at `frame` + ego footprint at `ego`, drawn in the frame of `view_pose`.
BevRaster render_frame(
  const Scenario & scenario, int frame, const VehicleState & ego, const VehicleState & view_pose,
  const RasterSpec & spec, const VehicleParams & params);

class Predictor
{
public:
  virtual ~Predictor() = default;
  /// Next raster given the rollout so far (oldest first) and the ego decision.
  virtual BevRaster predict(const std::vector<BevRaster> & history, const Decision & decision) = 0;
};

/// Repeats the newest input.
class IdentityPredictor : public Predictor
{
public:
  BevRaster predict(const std::vector<BevRaster> & history, const Decision & decision) override;
};

/// Returns stored ground-truth frames in order.
class OraclePredictor : public Predictor
{
public:
  explicit OraclePredictor(std::vector<BevRaster> truth) : truth_(std::move(truth)) {}
  BevRaster predict(const std::vector<BevRaster> & history, const Decision & decision) override;

private:
  std::vector<BevRaster> truth_;
  size_t next_{0};
};

/// Shifts the dynamic channel of the seed frame by k * pixel_velocity at
/// step k (rounded to whole pixels); other channels are copied from the seed.
class ShiftPredictor : public Predictor
{
public:
  explicit ShiftPredictor(const Vec2 & pixel_velocity) : velocity_(pixel_velocity) {}
  BevRaster predict(const std::vector<BevRaster> & history, const Decision & decision) override;

private:
  Vec2 velocity_;  // (columns, rows) per step
};

struct RolloutResult
{
  std::vector<BevRaster> predicted;
  std::vector<BevRaster> ground_truth;
  std::optional<std::string> error;
};

/// Log rasters for frames start..start+steps, all in the ego frame at `start`.
std::vector<BevRaster> ground_truth_rollout(
  const Scenario & scenario, int start, int steps, const RasterSpec & spec,
  const VehicleParams & params);

/// Auto-regressive prediction: seeded with the ground-truth raster at
/// `start`, every prediction is appended to the history fed to the next step.
RolloutResult run_prediction_rollout(
  const Scenario & scenario, Predictor & predictor, int steps = 60, int start = 0,
  const RasterSpec & spec = RasterSpec{}, const VehicleParams & params = VehicleParams{});

}  // namespace minidrive

#endif  // MINIDRIVE_SIM_LOOP_HPP_
