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

#ifndef MINIDRIVE_JSON_IO_HPP_
#define MINIDRIVE_JSON_IO_HPP_

#include "minidrive/flat_vehicle.hpp"
#include "minidrive/min_jerk_planner.hpp"
#include "minidrive/sim_loop.hpp"
#include "minidrive/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <ostream>

namespace minidrive
{

/// {"dt_piece": .., "t0": .., "pieces": [{"x": [f0..f5], "y": [f0..f5]}, ...]}
nlohmann::json trajectory_to_json(const PiecewiseQuintic & traj);
PiecewiseQuintic trajectory_from_json(const nlohmann::json & j);

nlohmann::json params_to_json(const VehicleParams & params);
/// Missing keys keep their defaults.
VehicleParams params_from_json(const nlohmann::json & j);

/// {"start": {"position": [x, y], "velocity": [vx, vy]}, "end": {...},
///  "waypoints": [[x, y], ...], "dt_piece": 0.1, "bounds": {...}}
nlohmann::json problem_to_json(const PlanningProblem & problem);
PlanningProblem problem_from_json(const nlohmann::json & j);

nlohmann::json planned_to_json(const PlannedTrajectory & planned);

nlohmann::json state_to_json(const VehicleState & s);

/// One line per frame, then an {"error": ..} line for aborted traces.
void write_trace_jsonl(const SimTrace & trace, std::ostream & os);

}  // namespace minidrive

#endif  // MINIDRIVE_JSON_IO_HPP_
