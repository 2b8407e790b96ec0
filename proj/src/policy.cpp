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

#include "minidrive/image_io.hpp"
#include "minidrive/policy.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace minidrive
{

using nlohmann::json;

void Observation::validate() const
{
  if (history.empty() || static_cast<int>(history.size()) > kContextLength) {
    throw InvalidInputError("observation history must hold 1..60 frames");
  }
  for (size_t i = 1; i < history.size(); ++i) {
    if (history[i].frame <= history[i - 1].frame) {
      throw InvalidInputError("observation history must be ordered oldest to newest");
    }
  }
}

void Decision::validate() const
{
  if (!waypoints.allFinite()) {
    throw PolicyError("decision waypoints must be finite");
  }
}

Decision replay_policy(const Observation & obs, const Scenario & scenario, int frame)
{
  obs.validate();
  Decision d{ego_frame_future(scenario, frame)};
  d.validate();
  return d;
}

Decision constant_velocity_policy(const Observation & obs)
{
  obs.validate();
  Decision d;
  for (int k = 1; k <= kDecisionSteps; ++k) {
    d.waypoints(k - 1, 0) = obs.ego.v * kFrameDt * k;
    d.waypoints(k - 1, 1) = 0.0;
  }
  d.validate();
  return d;
}

NoisyPolicy::NoisyPolicy(std::unique_ptr<Policy> inner, double sigma, std::uint64_t seed)
: inner_(std::move(inner)), sigma_(sigma), gen_(seed)
{
  if (!inner_) {
    throw InvalidInputError("noisy policy needs an inner policy");
  }
  if (!(std::isfinite(sigma_) && sigma_ >= 0.0)) {
    throw InvalidInputError("noise sigma must be finite and non-negative");
  }
}

Decision NoisyPolicy::decide(const Observation & obs)
{
  Decision d = inner_->decide(obs);
  if (sigma_ > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma_);
    for (int r = 0; r < kDecisionSteps; ++r) {
      d.waypoints(r, 0) += noise(gen_);
      d.waypoints(r, 1) += noise(gen_);
    }
  }
  d.validate();
  return d;
}

namespace
{

json ego_json(const VehicleState & s)
{
  return {{"px", s.px}, {"py", s.py}, {"theta", s.theta}, {"v", s.v}};
}

}  // namespace

std::string make_hello_request()
{
  return json{{"type", "hello"}, {"schema_version", kProtocolSchemaVersion}}.dump();
}

std::string make_decide_request(const Observation & obs, std::uint64_t id, RasterTransport rasters)
{
  json history = json::array();
  for (size_t i = 0; i < obs.history.size(); ++i) {
    const ObservationFrame & f = obs.history[i];
    json entry{{"frame", f.frame}, {"ego", ego_json(f.ego)}};
    const bool newest = i + 1 == obs.history.size();
    if (rasters == RasterTransport::inline_last && newest && f.raster) {
      entry["raster"] = base64_encode(encode_tensor(*f.raster));
    } else {
      entry["raster_ref"] = "frame:" + std::to_string(f.frame);
    }
    history.push_back(std::move(entry));
  }
  json req{
    {"type", "decide"}, {"id", id}, {"frame", obs.frame}, {"ego", ego_json(obs.ego)},
    {"history", std::move(history)}};
  return req.dump();
}

Decision parse_decision_response(const std::string & line, std::uint64_t expected_id)
{
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::parse_error & e) {
    throw PolicyError(std::string("malformed response: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    throw PolicyError("response lacks a string 'type'");
  }
  const std::string type = msg["type"].get<std::string>();
  if (type == "error") {
    throw PolicyError(
      "policy reported error " + msg.value("code", std::string("?")) + ": " +
      msg.value("message", std::string("")));
  }
  if (type != "decision") {
    throw PolicyError("expected a decision response, got '" + type + "'");
  }
  if (msg.contains("id")) {
    if (!msg["id"].is_number_unsigned() || msg["id"].get<std::uint64_t>() != expected_id) {
      throw PolicyError("decision response id does not match the request");
    }
  }
  if (!msg.contains("waypoints") || !msg["waypoints"].is_array()) {
    throw PolicyError("decision response lacks a 'waypoints' array");
  }
  const json & rows = msg["waypoints"];
  if (rows.size() != static_cast<size_t>(kDecisionSteps)) {
    throw PolicyError(
      "decision must have 40 waypoints, got " + std::to_string(rows.size()));
  }
  Decision d;
  for (int r = 0; r < kDecisionSteps; ++r) {
    const json & row = rows[static_cast<size_t>(r)];
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
      throw PolicyError("waypoint " + std::to_string(r) + " is not a numeric [x, y] pair");
    }
    d.waypoints(r, 0) = row[0].get<double>();
    d.waypoints(r, 1) = row[1].get<double>();
  }
  d.validate();
  return d;
}

}  // namespace minidrive
