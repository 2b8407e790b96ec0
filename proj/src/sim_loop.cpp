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

#include "minidrive/sim_loop.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace minidrive
{

namespace
{

bool is_multiple(double value, double step)
{
  const double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio) && std::round(ratio) >= 1.0;
}

}  // namespace

void SimConfig::validate() const
{
  if (!(std::isfinite(duration) && duration > 0.0)) {
    throw InvalidInputError("simulation duration must be positive");
  }
  if (std::abs(dt_sim - kFrameDt) > 1e-12) {
    throw InvalidInputError("simulation step must equal the 0.1 s scenario clock");
  }
  if (!is_multiple(duration, dt_sim)) {
    throw InvalidInputError("simulation duration must be a multiple of the simulation step");
  }
  if (!is_multiple(replan_period, dt_sim)) {
    throw InvalidInputError("replan period must be a positive multiple of the simulation step");
  }
  if (replan_period > kDecisionSteps * kFrameDt + 1e-9) {
    throw InvalidInputError("replan period cannot exceed the 4 s decision horizon");
  }
  if (!(std::isfinite(offroad_threshold) && offroad_threshold > 0.0)) {
    throw InvalidInputError("off-road threshold must be positive");
  }
  if (context_length < 1 || context_length > kContextLength) {
    throw InvalidInputError("context length must be in 1..60");
  }
  if (!(exec_substep > 0.0)) {
    throw InvalidInputError("execution substep must be positive");
  }
  if (start_frame < 0) {
    throw InvalidInputError("start frame must be non-negative");
  }
  bounds.validate();
  raster.validate();
}

int SimConfig::num_steps() const { return static_cast<int>(std::lround(duration / dt_sim)); }

int SimConfig::replan_every() const
{
  return static_cast<int>(std::lround(replan_period / dt_sim));
}

bool SimTrace::collided_within(int frame_limit) const
{
  for (size_t i = 0; i < frames.size() && static_cast<int>(i) <= frame_limit; ++i) {
    if (frames[i].events.collision) {
      return true;
    }
  }
  return false;
}

bool SimTrace::offroad_within(int frame_limit) const
{
  for (size_t i = 0; i < frames.size() && static_cast<int>(i) <= frame_limit; ++i) {
    if (frames[i].events.offroad) {
      return true;
    }
  }
  return false;
}

bool boxes_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 axes[4] = {a.axis(), a.normal(), b.axis(), b.normal()};
  for (const Vec2 & axis : axes) {
    double min_a = std::numeric_limits<double>::infinity();
    double max_a = -min_a;
    double min_b = min_a;
    double max_b = -min_a;
    for (const Vec2 & p : ca) {
      const double s = p.dot(axis);
      min_a = std::min(min_a, s);
      max_a = std::max(max_a, s);
    }
    for (const Vec2 & p : cb) {
      const double s = p.dot(axis);
      min_b = std::min(min_b, s);
      max_b = std::max(max_b, s);
    }
    if (std::min(max_a, max_b) - std::max(min_a, min_b) <= 0.0) {
      return false;
    }
  }
  return true;
}

bool detect_collision(const OrientedBox & ego, const std::vector<OrientedBox> & agents)
{
  return std::any_of(
    agents.begin(), agents.end(), [&ego](const OrientedBox & b) { return boxes_overlap(ego, b); });
}

bool detect_offroad(const Vec2 & ego_pos, const Polyline & reference, double threshold)
{
  if (reference.empty()) {
    throw InvalidInputError("off-road check needs a non-empty reference trajectory");
  }
  return point_polyline_distance(ego_pos, reference) > threshold;
}

BevRaster render_env(const StaticMap & map, const VehicleState & view_pose, const RasterSpec & spec)
{
  return rasterize_static(map, view_pose, spec);
}

BevRaster render_frame(
  const Scenario & scenario, int frame, const VehicleState & ego, const VehicleState & view_pose,
  const RasterSpec & spec, const VehicleParams & params)
{
  const BevRaster env = rasterize_static(scenario.map, view_pose, spec);
  const BevRaster dyn = rasterize_dynamic(scenario.agent_boxes(frame), view_pose, spec);
  // The ego footprint is drawn at `ego` in the frame of `view_pose`, which
  // differs from the ego pose during fixed-view rollouts.
  const BevRaster footprint = rasterize_dynamic({ego_footprint(ego, params)}, view_pose, spec);
  BevRaster ego_raster(spec);
  ego_raster.channel(Channel::ego) = footprint.channel(Channel::dynamic);
  return compose(compose(env, dyn), ego_raster);
}

PlanningProblem problem_from_decision(
  const VehicleState & ego, const Decision & decision, const VehicleParams & bounds,
  bool zero_end_velocity)
{
  decision.validate();
  const Eigen::Matrix2d to_world = Eigen::Rotation2Dd(ego.theta).toRotationMatrix();
  const Vec2 origin = ego.position();
  auto world = [&](int row) -> Vec2 {
    return origin + to_world * decision.waypoints.row(row).transpose();
  };

  PlanningProblem problem;
  problem.dt_piece = kFrameDt;
  problem.bounds = bounds;
  problem.start.position = origin;
  problem.start.velocity = ego.velocity();
  for (int k = 0; k + 1 < kDecisionSteps; ++k) {
    problem.waypoints.push_back(world(k));
  }
  problem.end.position = world(kDecisionSteps - 1);
  problem.end.velocity = zero_end_velocity
                           ? Vec2::Zero()
                           : Vec2((world(kDecisionSteps - 1) - world(kDecisionSteps - 2)) / kFrameDt);
  return problem;
}

SimTrace run_closed_loop(const Scenario & scenario, Policy & policy, const SimConfig & config)
{
  config.validate();
  if (config.start_frame >= scenario.num_frames()) {
    throw InvalidInputError("start frame lies beyond the scenario log");
  }
  const int steps = config.num_steps();
  const int every = config.replan_every();
  const double dt = config.dt_sim;
  const VehicleParams & params = config.bounds;
  const bool render = policy.needs_rasters() || config.record_rasters;
  const Polyline reference = ego_path(scenario, config.start_frame);

  SimTrace trace;
  trace.scenario_id = scenario.id;
  trace.frames.reserve(static_cast<size_t>(steps) + 1);

  VehicleState state = scenario.ego_log[static_cast<size_t>(config.start_frame)];
  std::deque<ObservationFrame> history;

  auto observe = [&](int frame, const VehicleState & ego) {
    ObservationFrame f{frame, ego, nullptr};
    if (render) {
      f.raster = std::make_shared<const BevRaster>(
        render_frame(scenario, frame, ego, ego, config.raster, params));
      if (config.record_rasters) {
        trace.rasters.push_back(*f.raster);
      }
    }
    history.push_back(std::move(f));
    while (static_cast<int>(history.size()) > config.context_length) {
      history.pop_front();
    }
  };
  auto events_at = [&](int frame, const VehicleState & ego, bool infeasible) {
    FrameEvents ev;
    ev.collision = config.collision &&
                   detect_collision(ego_footprint(ego, params), scenario.agent_boxes(frame));
    ev.offroad = detect_offroad(ego.position(), reference, config.offroad_threshold);
    ev.infeasible_plan = infeasible;
    return ev;
  };

  trace.frames.push_back(
    {config.start_frame, 0.0, state, -1, events_at(config.start_frame, state, false)});
  observe(config.start_frame, state);

  std::optional<PiecewiseQuintic> plan;
  bool plan_infeasible = false;
  for (int i = 0; i < steps; ++i) {
    const int frame = config.start_frame + i;
    const double t = i * dt;
    if (i % every == 0) {
      try {
        Observation obs{{history.begin(), history.end()}, state, frame};
        Decision decision = policy.decide(obs);
        const PlanningProblem problem =
          problem_from_decision(state, decision, params, config.zero_end_velocity);
        PlannedTrajectory planned = solve(problem);
        if (config.bounds_mode == BoundsMode::rescale) {
          planned = check_and_enforce_bounds(std::move(planned), params, BoundsMode::rescale);
        }
        plan_infeasible = !planned.feasible;
        plan.emplace(planned.traj.pieces(), planned.traj.dt_piece(), t);
        trace.plans.push_back(*plan);
        trace.decisions.push_back(std::move(decision));
      } catch (const Error & e) {
        trace.error = e.code() + ": " + e.what();
        break;
      }
    }

    const double held = state.theta;
    const Vec2 held_dir(std::cos(held), std::sin(held));
    const PiecewiseQuintic & active = *plan;
    auto control_at = [&](double tau) {
      const FlatSignal sig = to_flat_signal(active, std::clamp(tau, active.t0(), active.t_end()));
      if (sig.d_sigma.dot(held_dir) < 0.0) {
        // Backward motion is not executable; brake along the held heading.
        return VehicleControl(sig.dd_sigma.dot(held_dir), 0.0);
      }
      return flat_to_state_held(sig, params, held).second;
    };
    try {
      state = step_dynamics(state, control_at, params, t, dt, config.exec_substep);
    } catch (const Error & e) {
      trace.error = e.code() + ": " + e.what();
      break;
    }

    trace.frames.push_back(
      {frame + 1, (i + 1) * dt, state, static_cast<int>(trace.plans.size()) - 1,
       events_at(frame + 1, state, plan_infeasible)});
    observe(frame + 1, state);
  }
  return trace;
}

BevRaster IdentityPredictor::predict(const std::vector<BevRaster> & history, const Decision &)
{
  if (history.empty()) {
    throw InvalidInputError("identity predictor needs a non-empty history");
  }
  return history.back();
}

BevRaster OraclePredictor::predict(const std::vector<BevRaster> &, const Decision &)
{
  if (next_ >= truth_.size()) {
    throw HorizonError("oracle predictor ran out of ground-truth frames");
  }
  return truth_[next_++];
}

BevRaster ShiftPredictor::predict(const std::vector<BevRaster> & history, const Decision &)
{
  if (history.empty()) {
    throw InvalidInputError("shift predictor needs a non-empty history");
  }
  const BevRaster & seed = history.front();
  const double k = static_cast<double>(history.size());
  const int dc = static_cast<int>(std::lround(k * velocity_.x()));
  const int dr = static_cast<int>(std::lround(k * velocity_.y()));
  BevRaster out = seed;
  auto & dyn = out.channel(Channel::dynamic);
  const auto & src = seed.channel(Channel::dynamic);
  dyn.setZero();
  const int rows = static_cast<int>(src.rows());
  const int cols = static_cast<int>(src.cols());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int sr = r - dr;
      const int sc = c - dc;
      if (sr >= 0 && sr < rows && sc >= 0 && sc < cols) {
        dyn(r, c) = src(sr, sc);
      }
    }
  }
  return out;
}

std::vector<BevRaster> ground_truth_rollout(
  const Scenario & scenario, int start, int steps, const RasterSpec & spec,
  const VehicleParams & params)
{
  if (start < 0 || steps < 0 || start + steps >= scenario.num_frames()) {
    throw HorizonError("rollout needs frames " + std::to_string(start) + ".." +
                       std::to_string(start + steps) + " of the log");
  }
  const VehicleState & view = scenario.ego_log[static_cast<size_t>(start)];
  std::vector<BevRaster> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    out.push_back(render_frame(
      scenario, start + k, scenario.ego_log[static_cast<size_t>(start + k)], view, spec, params));
  }
  return out;
}

RolloutResult run_prediction_rollout(
  const Scenario & scenario, Predictor & predictor, int steps, int start, const RasterSpec & spec,
  const VehicleParams & params)
{
  std::vector<BevRaster> truth = ground_truth_rollout(scenario, start, steps, spec, params);
  RolloutResult result;
  std::vector<BevRaster> history{truth.front()};
  for (int k = 1; k <= steps; ++k) {
    const int frame = start + k - 1;
    const VehicleState & ego = scenario.ego_log[static_cast<size_t>(frame)];
    Observation obs{{{frame, ego, nullptr}}, ego, frame};
    try {
      const Decision decision = frame + kDecisionSteps < scenario.num_frames()
                                  ? replay_policy(obs, scenario, frame)
                                  : constant_velocity_policy(obs);
      BevRaster next = predictor.predict(history, decision);
      if (!(next.spec() == spec)) {
        throw InvalidInputError("predictor returned a raster with a different spec");
      }
      for (int c = 0; c < kRasterChannels; ++c) {
        if (!((next.channel(c) >= 0.0F).all() && (next.channel(c) <= 1.0F).all())) {
          throw InvalidInputError("predictor returned values outside [0, 1]");
        }
      }
      result.predicted.push_back(next);
      result.ground_truth.push_back(truth[static_cast<size_t>(k)]);
      history.push_back(std::move(next));
      if (static_cast<int>(history.size()) > kContextLength) {
        history.erase(history.begin());
      }
    } catch (const Error & e) {
      result.error = e.code() + ": " + e.what();
      break;
    }
  }
  return result;
}

}  // namespace minidrive
