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

#include "minidrive/json_io.hpp"

#include <string>

namespace minidrive
{

namespace
{

using nlohmann::json;

Vec2 vec2_from_json(const json & j, const char * what)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidInputError(std::string(what) + " must be a [x, y] number pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json vec2_to_json(const Vec2 & v) { return json::array({v.x(), v.y()}); }

const json & require(const json & j, const char * key)
{
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInputError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const json & j, const char * key)
{
  const json & v = require(j, key);
  if (!v.is_number()) {
    throw InvalidInputError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

BoundaryState boundary_from_json(const json & j, const char * what)
{
  BoundaryState b;
  try {
    b.position = vec2_from_json(require(j, "position"), "position");
    b.velocity = vec2_from_json(require(j, "velocity"), "velocity");
    if (j.contains("acceleration")) {
      b.acceleration = vec2_from_json(j.at("acceleration"), "acceleration");
    }
  } catch (const InvalidInputError & e) {
    throw InvalidInputError(std::string(what) + ": " + e.what());
  }
  return b;
}

json boundary_to_json(const BoundaryState & b)
{
  json j = {{"position", vec2_to_json(b.position)}, {"velocity", vec2_to_json(b.velocity)}};
  if (b.acceleration) {
    j["acceleration"] = vec2_to_json(*b.acceleration);
  }
  return j;
}

}  // namespace

nlohmann::json trajectory_to_json(const PiecewiseQuintic & traj)
{
  json pieces = json::array();
  for (const auto & p : traj.pieces()) {
    json x = json::array();
    json y = json::array();
    for (int k = 0; k < 6; ++k) {
      x.push_back(p.coeffs(k, 0));
      y.push_back(p.coeffs(k, 1));
    }
    pieces.push_back({{"x", x}, {"y", y}});
  }
  return {{"dt_piece", traj.dt_piece()}, {"t0", traj.t0()}, {"pieces", pieces}};
}

PiecewiseQuintic trajectory_from_json(const nlohmann::json & j)
{
  const json & arr = require(j, "pieces");
  if (!arr.is_array()) {
    throw InvalidInputError("field 'pieces' must be an array");
  }
  std::vector<QuinticPiece> pieces;
  for (const json & p : arr) {
    QuinticPiece piece;
    const char * axes[2] = {"x", "y"};
    for (int axis = 0; axis < 2; ++axis) {
      const json & c = require(p, axes[axis]);
      if (!c.is_array() || c.size() != 6) {
        throw InvalidInputError("each piece axis needs 6 coefficients");
      }
      for (int k = 0; k < 6; ++k) {
        if (!c[static_cast<size_t>(k)].is_number()) {
          throw InvalidInputError("coefficients must be numbers");
        }
        piece.coeffs(k, axis) = c[static_cast<size_t>(k)].get<double>();
      }
    }
    pieces.push_back(piece);
  }
  const double t0 = j.contains("t0") ? number(j, "t0") : 0.0;
  return PiecewiseQuintic(std::move(pieces), number(j, "dt_piece"), t0);
}

nlohmann::json params_to_json(const VehicleParams & params)
{
  return {
    {"wheelbase", params.wheelbase}, {"v_max", params.v_max}, {"a_max", params.a_max},
    {"length", params.length},       {"width", params.width}};
}

VehicleParams params_from_json(const nlohmann::json & j)
{
  VehicleParams p;
  if (!j.is_object()) {
    throw InvalidInputError("vehicle parameters must be an object");
  }
  auto read = [&j](const char * key, double & field) {
    if (j.contains(key)) {
      field = number(j, key);
    }
  };
  read("wheelbase", p.wheelbase);
  read("v_max", p.v_max);
  read("a_max", p.a_max);
  read("length", p.length);
  read("width", p.width);
  p.validate();
  return p;
}

nlohmann::json problem_to_json(const PlanningProblem & problem)
{
  json wps = json::array();
  for (const Vec2 & w : problem.waypoints) {
    wps.push_back(vec2_to_json(w));
  }
  return {
    {"start", boundary_to_json(problem.start)},
    {"end", boundary_to_json(problem.end)},
    {"waypoints", wps},
    {"dt_piece", problem.dt_piece},
    {"bounds", params_to_json(problem.bounds)}};
}

PlanningProblem problem_from_json(const nlohmann::json & j)
{
  PlanningProblem problem;
  problem.start = boundary_from_json(require(j, "start"), "start");
  problem.end = boundary_from_json(require(j, "end"), "end");
  if (j.contains("waypoints")) {
    const json & wps = j.at("waypoints");
    if (!wps.is_array()) {
      throw InvalidInputError("field 'waypoints' must be an array");
    }
    for (const json & w : wps) {
      problem.waypoints.push_back(vec2_from_json(w, "waypoint"));
    }
  }
  if (j.contains("dt_piece")) {
    problem.dt_piece = number(j, "dt_piece");
  }
  if (j.contains("bounds")) {
    problem.bounds = params_from_json(j.at("bounds"));
  }
  if (j.contains("initial_waypoint")) {
    problem.initial_waypoint = vec2_from_json(j.at("initial_waypoint"), "initial_waypoint");
  }
  return problem;
}

nlohmann::json planned_to_json(const PlannedTrajectory & planned)
{
  return {
    {"jerk_cost", planned.jerk_cost},
    {"feasible", planned.feasible},
    {"peak_speed", planned.peak_speed},
    {"peak_accel", planned.peak_accel},
    {"trajectory", trajectory_to_json(planned.traj)}};
}

nlohmann::json state_to_json(const VehicleState & s)
{
  return {{"px", s.px}, {"py", s.py}, {"theta", s.theta}, {"v", s.v}};
}

void write_trace_jsonl(const SimTrace & trace, std::ostream & os)
{
  for (const SimFrame & f : trace.frames) {
    const json line = {
      {"scenario", trace.scenario_id},
      {"frame", f.frame},
      {"time", f.time},
      {"ego", state_to_json(f.ego)},
      {"plan_id", f.plan_id},
      {"collision", f.events.collision},
      {"offroad", f.events.offroad},
      {"infeasible_plan", f.events.infeasible_plan}};
    os << line.dump() << '\n';
  }
  if (trace.error) {
    os << json{{"scenario", trace.scenario_id}, {"error", *trace.error}}.dump() << '\n';
  }
}

}  // namespace minidrive
