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

#ifndef MINIDRIVE_FIXTURES_HPP_
#define MINIDRIVE_FIXTURES_HPP_

#include "minidrive/scenario.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace minidrive::fixtures
{

/// Ego speed and steering as functions of time; the log is produced by
/// integrating the bicycle model under them, so logs are kinematically exact.
struct EgoProfile
{
  VehicleState initial;
  std::function<double(double)> accel = [](double) { return 0.0; };
  std::function<double(double)> steer = [](double) { return 0.0; };
};

std::vector<VehicleState> integrate_ego_log(
  const EgoProfile & profile, int frames, const VehicleParams & params = VehicleParams{});

/// Ego cruising along a straight two-lane road with agents in the next lane.
Scenario straight_road(int frames = 300, double speed = 8.0, std::uint32_t seed = 0);

/// Ego brakes to a stop before a red light at an intersection.
Scenario red_light_stop(std::uint32_t seed = 0);
/// Ego crosses a green-light intersection while cross traffic clears it.
Scenario green_light_dynamic(std::uint32_t seed = 0);
/// Dense straight road with a lane change between slower vehicles.
Scenario multi_agent_road(std::uint32_t seed = 0);
/// Ego waits at red, then pulls away when the light turns green.
Scenario red_to_green_start(std::uint32_t seed = 0);

/// Ego drives at constant speed toward a vehicle parked in its lane; the
/// footprints first overlap at frame 46.
Scenario collision_course();

/// The four scene archetypes used for closed-loop evaluation.
std::vector<Scenario> paper_scenes(std::uint32_t seed = 0);
/// Straight road plus the four archetypes; all collision-free.
std::vector<Scenario> basic_set(std::uint32_t seed = 0);

}  // namespace minidrive::fixtures

#endif  // MINIDRIVE_FIXTURES_HPP_
