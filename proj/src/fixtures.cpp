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

#include "minidrive/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace minidrive::fixtures
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kLaneWidth = 3.5;

// Portable uniform draw in [lo, hi); std distributions differ across standard libraries.
class Jitter
{
public:
  explicit Jitter(std::uint32_t seed) : gen_(seed) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * (gen_() / 4294967296.0); }

private:
  std::mt19937 gen_;
};

Polygon rect(double x0, double y0, double x1, double y1)
{
  return {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
}

/// Two-lane road along +x (lane centers y = 0 and y = 3.5).
StaticMap two_lane_road(double x0, double x1)
{
  StaticMap map;
  map.lanes.push_back({Vec2(x0, 0.0), Vec2(x1, 0.0)});
  map.lanes.push_back({Vec2(x0, kLaneWidth), Vec2(x1, kLaneWidth)});
  map.drivable_areas.push_back(rect(x0, -kLaneWidth / 2, x1, kLaneWidth * 1.5));
  return map;
}

/// Two-lane road crossed by a two-lane road along y at x in [cx - 7.5, cx + 7.5].
StaticMap crossroads(double x0, double x1, double cx)
{
  StaticMap map = two_lane_road(x0, x1);
  map.lanes.push_back({Vec2(cx - 1.75, -80.0), Vec2(cx - 1.75, 80.0)});
  map.lanes.push_back({Vec2(cx + 1.75, 80.0), Vec2(cx + 1.75, -80.0)});
  map.drivable_areas.push_back(rect(cx - 3.5, -80.0, cx + 3.5, 80.0));
  map.intersections.push_back(rect(cx - 3.5, -kLaneWidth / 2, cx + 3.5, kLaneWidth * 1.5));
  return map;
}

/// Agent moving in a straight line at constant speed, present on [first, last).
AgentTrack straight_agent(
  const std::string & id, AgentKind kind, const Vec2 & start, double heading, double speed,
  int frames, int first = 0, int last = -1)
{
  AgentTrack track;
  track.id = id;
  track.kind = kind;
  if (kind == AgentKind::pedestrian) {
    track.length = 0.6;
    track.width = 0.6;
  }
  track.poses.resize(static_cast<size_t>(frames));
  const Vec2 dir(std::cos(heading), std::sin(heading));
  const int end = last < 0 ? frames : last;
  for (int f = first; f < end; ++f) {
    track.poses[static_cast<size_t>(f)] = AgentPose{start + speed * kFrameDt * f * dir, heading};
  }
  return track;
}

/// Smooth speed change of `delta_v` over [t0, t0 + duration]; zero elsewhere.
double sine_ramp(double t, double t0, double duration, double delta_v)
{
  if (t < t0 || t > t0 + duration) {
    return 0.0;
  }
  return delta_v * kPi / (2.0 * duration) * std::sin(kPi * (t - t0) / duration);
}

}  // namespace

std::vector<VehicleState> integrate_ego_log(
  const EgoProfile & profile, int frames, const VehicleParams & params)
{
  std::vector<VehicleState> log;
  log.reserve(static_cast<size_t>(frames));
  VehicleState state = profile.initial;
  const auto control_at = [&profile](double t) {
    return VehicleControl(profile.accel(t), profile.steer(t));
  };
  for (int f = 0; f < frames; ++f) {
    log.push_back(state);
    state = step_dynamics(state, control_at, params, f * kFrameDt, kFrameDt, 0.005);
  }
  return log;
}

Scenario straight_road(int frames, double speed, std::uint32_t seed)
{
  Jitter jitter(seed);
  Scenario sc;
  sc.id = "straight_road";
  sc.map = two_lane_road(-60.0, 60.0 + speed * kFrameDt * frames + 60.0);
  sc.ego_log = integrate_ego_log({VehicleState(0.0, 0.0, 0.0, speed)}, frames);
  sc.agents.push_back(straight_agent(
    "lead_left", AgentKind::vehicle, Vec2(20.0, kLaneWidth), 0.0, speed + jitter(0.0, 0.5), frames));
  sc.agents.push_back(straight_agent(
    "trail_left", AgentKind::vehicle, Vec2(-15.0, kLaneWidth), 0.0, speed + jitter(0.0, 0.5),
    frames));
  sc.agents.push_back(straight_agent(
    "walker", AgentKind::pedestrian, Vec2(5.0, -4.0), 0.0, 1.2 + jitter(0.0, 0.3), frames, 20));
  return sc;
}

Scenario red_light_stop(std::uint32_t seed)
{
  Jitter jitter(seed);
  constexpr int frames = 300;
  constexpr double cx = 67.0;
  Scenario sc;
  sc.id = "red_light_intersection";
  sc.map = crossroads(-80.0, 200.0, cx);
  // Cruise at 10 m/s for 2 s, brake to a stop over 8 s: stops at x = 55.
  EgoProfile profile{VehicleState(-5.0, 0.0, 0.0, 10.0)};
  profile.accel = [](double t) { return sine_ramp(t, 2.0, 8.0, -10.0); };
  sc.ego_log = integrate_ego_log(profile, frames);
  for (int k = 0; k < 4; ++k) {
    sc.agents.push_back(straight_agent(
      "cross_" + std::to_string(k), AgentKind::vehicle, Vec2(cx + 1.75, -60.0 - 35.0 * k),
      kPi / 2, 10.0 + jitter(-0.3, 0.3), frames));
  }
  sc.agents.push_back(straight_agent(
    "oncoming", AgentKind::vehicle, Vec2(150.0, kLaneWidth), kPi, 6.0 + jitter(-0.3, 0.3), frames));
  sc.traffic_lights.push_back({"main", Vec2(cx - 9.0, -3.0), {{0, LightState::red}}});
  return sc;
}

Scenario green_light_dynamic(std::uint32_t seed)
{
  Jitter jitter(seed);
  constexpr int frames = 300;
  constexpr double cx = 67.0;
  Scenario sc;
  sc.id = "green_light_dynamic_intersection";
  sc.map = crossroads(-80.0, 320.0, cx);
  sc.ego_log = integrate_ego_log({VehicleState(-5.0, 0.0, 0.0, 9.0)}, frames);
  // Cross traffic clears the box well before the ego arrives (t ~ 8 s).
  sc.agents.push_back(straight_agent(
    "cross_early", AgentKind::vehicle, Vec2(cx + 1.75, -30.0), kPi / 2, 10.0 + jitter(0.0, 0.5),
    frames));
  sc.agents.push_back(straight_agent(
    "cross_late", AgentKind::vehicle, Vec2(cx - 1.75, 160.0), -kPi / 2, 10.0 + jitter(0.0, 0.5),
    frames));
  sc.agents.push_back(straight_agent(
    "oncoming", AgentKind::vehicle, Vec2(140.0, kLaneWidth), kPi, 8.0 + jitter(-0.3, 0.3), frames));
  sc.agents.push_back(straight_agent(
    "crosswalk", AgentKind::pedestrian, Vec2(cx - 5.5, 8.0), kPi / 2, 1.3, frames, 0, 150));
  sc.traffic_lights.push_back({"main", Vec2(cx - 9.0, -3.0), {{0, LightState::green}}});
  return sc;
}

Scenario multi_agent_road(std::uint32_t seed)
{
  Jitter jitter(seed);
  constexpr int frames = 300;
  constexpr double speed = 10.0;
  constexpr double t_start = 3.0;
  constexpr double duration = 4.0;
  const VehicleParams params;
  Scenario sc;
  sc.id = "multi_agent_straight_road";
  sc.map = two_lane_road(-80.0, 400.0);
  // Sine steering gives a lateral shift of about one lane with zero net heading change.
  const double steer_peak =
    kLaneWidth * 2.0 * kPi * params.wheelbase / (speed * speed * duration * duration);
  EgoProfile profile{VehicleState(0.0, 0.0, 0.0, speed)};
  profile.steer = [=](double t) {
    if (t < t_start || t > t_start + duration) {
      return 0.0;
    }
    return steer_peak * std::sin(2.0 * kPi * (t - t_start) / duration);
  };
  sc.ego_log = integrate_ego_log(profile, frames, params);
  sc.agents.push_back(straight_agent(
    "slow_lead", AgentKind::vehicle, Vec2(35.0, 0.0), 0.0, 7.0 + jitter(-0.2, 0.2), frames));
  sc.agents.push_back(straight_agent(
    "left_trail", AgentKind::vehicle, Vec2(-30.0, kLaneWidth), 0.0, 10.0 + jitter(-0.3, 0.0),
    frames));
  sc.agents.push_back(straight_agent(
    "left_lead", AgentKind::vehicle, Vec2(80.0, kLaneWidth), 0.0, 11.0 + jitter(0.0, 0.3), frames));
  sc.agents.push_back(straight_agent(
    "walker", AgentKind::pedestrian, Vec2(10.0, -5.0), 0.0, 1.4, frames));
  return sc;
}

Scenario red_to_green_start(std::uint32_t seed)
{
  Jitter jitter(seed);
  constexpr int frames = 300;
  constexpr double cx = 67.0;
  Scenario sc;
  sc.id = "red_to_green_start";
  sc.map = crossroads(-80.0, 300.0, cx);
  // Waiting at the stop line; pulls away to 8 m/s over 6 s once green.
  EgoProfile profile{VehicleState(55.0, 0.0, 0.0, 0.0)};
  profile.accel = [](double t) { return sine_ramp(t, 5.5, 6.0, 8.0); };
  sc.ego_log = integrate_ego_log(profile, frames);
  sc.agents.push_back(straight_agent(
    "cross_a", AgentKind::vehicle, Vec2(cx + 1.75, -40.0), kPi / 2, 10.0 + jitter(0.0, 0.5),
    frames));
  sc.agents.push_back(straight_agent(
    "cross_b", AgentKind::vehicle, Vec2(cx - 1.75, 25.0), -kPi / 2, 10.0 + jitter(0.0, 0.5),
    frames));
  sc.agents.push_back(straight_agent(
    "queued_behind", AgentKind::vehicle, Vec2(46.0, 0.0), 0.0, 0.0, frames));
  sc.traffic_lights.push_back(
    {"main", Vec2(cx - 9.0, -3.0), {{0, LightState::red}, {50, LightState::green}}});
  return sc;
}

Scenario collision_course()
{
  constexpr int frames = 120;
  Scenario sc;
  sc.id = "collision_course";
  sc.map = two_lane_road(-60.0, 200.0);
  sc.ego_log = integrate_ego_log({VehicleState(0.0, 0.0, 0.0, 10.0)}, frames);
  // Rear bumper at 47.95 m; the ego front (center + 2.25) passes it between frames 45 and 46.
  sc.agents.push_back(
    straight_agent("parked", AgentKind::vehicle, Vec2(50.2, 0.0), 0.0, 0.0, frames));
  return sc;
}

std::vector<Scenario> paper_scenes(std::uint32_t seed)
{
  return {
    red_light_stop(seed), green_light_dynamic(seed), multi_agent_road(seed),
    red_to_green_start(seed)};
}

std::vector<Scenario> basic_set(std::uint32_t seed)
{
  std::vector<Scenario> out{straight_road(300, 8.0, seed)};
  for (auto & s : paper_scenes(seed)) {
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace minidrive::fixtures
