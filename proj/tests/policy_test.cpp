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
#include "minidrive/image_io.hpp"
#include "minidrive/policy.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <random>
#include <string>

namespace minidrive
{
namespace
{

using nlohmann::json;

Observation observation_at(const Scenario & sc, int frame, int context = 1)
{
  Observation obs;
  obs.frame = frame;
  obs.ego = sc.ego_log.at(static_cast<size_t>(frame));
  for (int f = std::max(0, frame - context + 1); f <= frame; ++f) {
    obs.history.push_back({f, sc.ego_log[static_cast<size_t>(f)], nullptr});
  }
  return obs;
}

Observation speed_observation(double v)
{
  Observation obs;
  obs.ego = VehicleState(3.0, -2.0, 0.4, v);
  obs.history.push_back({0, obs.ego, nullptr});
  return obs;
}

std::string server(const std::string & mode) { return std::string(FAKE_POLICY_SERVER) + " " + mode; }

std::string policy_error_message(const std::function<void()> & fn)
{
  try {
    fn();
  } catch (const PolicyError & e) {
    return e.what();
  }
  ADD_FAILURE() << "expected a policy error";
  return "";
}

TEST(Observation, Validation)
{
  Observation obs;
  EXPECT_THROW(obs.validate(), InvalidInputError);
  obs.history.resize(61);
  for (int i = 0; i < 61; ++i) {
    obs.history[static_cast<size_t>(i)].frame = i;
  }
  EXPECT_THROW(obs.validate(), InvalidInputError);
  obs.history.resize(60);
  EXPECT_NO_THROW(obs.validate());
  std::swap(obs.history[3], obs.history[4]);
  EXPECT_THROW(obs.validate(), InvalidInputError);
}

TEST(ReplayPolicy, EqualsExtractedTargets)
{
  const Scenario sc = fixtures::green_light_dynamic(2);
  const auto records = filter_and_extract({sc});
  for (const auto & r : records) {
    const Decision d = replay_policy(observation_at(sc, r.frame), sc, r.frame);
    ASSERT_TRUE((d.waypoints.array() == r.target_positions.array()).all()) << r.frame;
  }
  ReplayPolicy policy(sc);
  EXPECT_EQ(policy.name(), "replay");
  EXPECT_TRUE((policy.decide(observation_at(sc, 12)).waypoints.array() == records[12].target_positions.array()).all());
}

TEST(ReplayPolicy, ConstantVelocityScenario)
{
  Scenario sc;
  for (int f = 0; f < 100; ++f) {
    sc.ego_log.emplace_back(0.5 * f, 0.0, 0.0, 5.0);
  }
  const Decision d = replay_policy(observation_at(sc, 10), sc, 10);
  for (int k = 1; k <= 40; ++k) {
    EXPECT_EQ(d.waypoints(k - 1, 0), 0.5 * k);
    EXPECT_EQ(d.waypoints(k - 1, 1), 0.0);
  }
}

TEST(ReplayPolicy, HorizonBoundary)
{
  const Scenario sc = fixtures::straight_road(120);
  EXPECT_NO_THROW(replay_policy(observation_at(sc, 79), sc, 79));
  EXPECT_THROW(replay_policy(observation_at(sc, 80), sc, 80), HorizonError);
}

TEST(ConstantVelocityPolicy, Examples)
{
  EXPECT_TRUE(constant_velocity_policy(speed_observation(0.0)).waypoints.isZero());
  // 4 s of travel: 40 m at 10 m/s, 4 m at 1 m/s.
  const Decision d = constant_velocity_policy(speed_observation(10.0));
  EXPECT_NEAR(d.waypoints(39, 0), 40.0, 1e-12);
  EXPECT_EQ(d.waypoints(39, 1), 0.0);
  EXPECT_NEAR(constant_velocity_policy(speed_observation(1.0)).waypoints(39, 0), 4.0, 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int i = 0; i < 50; ++i) {
    const Decision r = constant_velocity_policy(speed_observation(u(rng)));
    EXPECT_TRUE(r.waypoints.col(1).isZero());
    for (int k = 1; k < 40; ++k) {
      EXPECT_GE(r.waypoints(k, 0), r.waypoints(k - 1, 0));
    }
  }
}

TEST(NoisyPolicy, SeededAndZeroSigmaTransparent)
{
  const Observation obs = speed_observation(7.0);
  NoisyPolicy quiet(std::make_unique<ConstantVelocityPolicy>(), 0.0, 1);
  EXPECT_TRUE((quiet.decide(obs).waypoints.array() == constant_velocity_policy(obs).waypoints.array()).all());
  NoisyPolicy a(std::make_unique<ConstantVelocityPolicy>(), 0.3, 42);
  NoisyPolicy b(std::make_unique<ConstantVelocityPolicy>(), 0.3, 42);
  const Decision da = a.decide(obs);
  EXPECT_TRUE((da.waypoints.array() == b.decide(obs).waypoints.array()).all());
  EXPECT_FALSE((da.waypoints.array() == constant_velocity_policy(obs).waypoints.array()).all());
  EXPECT_THROW(NoisyPolicy(nullptr, 0.1, 1), InvalidInputError);
  EXPECT_THROW(NoisyPolicy(std::make_unique<ConstantVelocityPolicy>(), -1.0, 1), InvalidInputError);
}

TEST(Protocol, HelloRequest)
{
  const json hello = json::parse(make_hello_request());
  EXPECT_EQ(hello.at("type"), "hello");
  EXPECT_EQ(hello.at("schema_version"), 1);
}

TEST(Protocol, DecideRequestShape)
{
  const Scenario sc = fixtures::straight_road(100);
  Observation obs = observation_at(sc, 20, 5);
  auto raster = std::make_shared<BevRaster>();
  raster->channel(Channel::ego)(1, 2) = 1.0F;
  for (auto & h : obs.history) {
    h.raster = raster;
  }
  const json ref = json::parse(make_decide_request(obs, 9, RasterTransport::reference));
  EXPECT_EQ(ref.at("type"), "decide");
  EXPECT_EQ(ref.at("id"), 9);
  EXPECT_EQ(ref.at("frame"), 20);
  EXPECT_EQ(ref.at("ego").at("v").get<double>(), obs.ego.v);
  ASSERT_EQ(ref.at("history").size(), 5U);
  EXPECT_EQ(ref.at("history")[0].at("raster_ref"), "frame:16");
  EXPECT_EQ(ref.at("history")[4].at("frame"), 20);

  const json inl = json::parse(make_decide_request(obs, 10, RasterTransport::inline_last));
  EXPECT_TRUE(inl.at("history")[3].contains("raster_ref"));
  const BevRaster back = decode_tensor(base64_decode(inl.at("history")[4].at("raster").get<std::string>()));
  EXPECT_EQ(back, *raster);
}

TEST(Protocol, ParseDecisionResponse)
{
  json rows = json::array();
  for (int k = 0; k < 40; ++k) {
    rows.push_back({0.25 * k, -0.1 * k});
  }
  const json ok{{"type", "decision"}, {"id", 4}, {"waypoints", rows}};
  const Decision d = parse_decision_response(ok.dump(), 4);
  EXPECT_EQ(d.waypoints(39, 0), 0.25 * 39);
  EXPECT_EQ(d.waypoints(39, 1), -0.1 * 39);

  EXPECT_THROW(parse_decision_response(ok.dump(), 5), PolicyError);
  EXPECT_THROW(parse_decision_response("{", 4), PolicyError);
  EXPECT_THROW(parse_decision_response(R"({"type":"hello"})", 4), PolicyError);
  json short_rows = ok;
  short_rows["waypoints"].erase(39);
  EXPECT_THROW(parse_decision_response(short_rows.dump(), 4), PolicyError);
  json bad_row = ok;
  bad_row["waypoints"][3] = {1.0};
  EXPECT_THROW(parse_decision_response(bad_row.dump(), 4), PolicyError);
  json text_row = ok;
  text_row["waypoints"][3] = {"1", 2};
  EXPECT_THROW(parse_decision_response(text_row.dump(), 4), PolicyError);
  const std::string msg = policy_error_message(
    [] { parse_decision_response(R"({"type":"error","code":"oom","message":"boom"})", 1); });
  EXPECT_NE(msg.find("oom"), std::string::npos);
}

TEST(ExternalPolicy, MatchesConstantVelocity)
{
  ExternalPolicy policy(server("cv"));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 25.0);
  for (int i = 0; i < 50; ++i) {
    const Observation obs = speed_observation(u(rng));
    const Decision remote = external_policy(obs, policy);
    const Decision local = constant_velocity_policy(obs);
    EXPECT_LE((remote.waypoints - local.waypoints).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ExternalPolicy, ZerosServer)
{
  ExternalPolicy policy(server("zeros"));
  EXPECT_TRUE(policy.decide(speed_observation(5.0)).waypoints.isZero());
  EXPECT_TRUE(policy.decide(speed_observation(6.0)).waypoints.isZero());
}

TEST(ExternalPolicy, ShapeViolation)
{
  ExternalPolicy policy(server("rows39"));
  const std::string msg = policy_error_message([&] { policy.decide(speed_observation(1.0)); });
  EXPECT_NE(msg.find("40"), std::string::npos);
}

TEST(ExternalPolicy, MalformedLine)
{
  ExternalPolicy policy(server("garbage"));
  EXPECT_THROW(policy.decide(speed_observation(1.0)), PolicyError);
}

TEST(ExternalPolicy, ErrorResponse)
{
  ExternalPolicy policy(server("error"));
  const std::string msg = policy_error_message([&] { policy.decide(speed_observation(1.0)); });
  EXPECT_NE(msg.find("model_failure"), std::string::npos);
}

TEST(ExternalPolicy, Timeout)
{
  ExternalPolicyOptions opts;
  opts.timeout = std::chrono::milliseconds(200);
  ExternalPolicy policy(server("silent"), opts);
  const auto start = std::chrono::steady_clock::now();
  const std::string msg = policy_error_message([&] { policy.decide(speed_observation(1.0)); });
  EXPECT_NE(msg.find("timed out"), std::string::npos);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(3));
  // A timed-out session is not reused.
  EXPECT_THROW(policy.decide(speed_observation(1.0)), PolicyError);
}

TEST(ExternalPolicy, HandshakeRejected)
{
  EXPECT_THROW(ExternalPolicy(server("bad_hello")), PolicyError);
}

TEST(ExternalPolicy, ProcessExit)
{
  ExternalPolicy policy(server("exit"));
  EXPECT_THROW(policy.decide(speed_observation(1.0)), PolicyError);
}

TEST(ExternalPolicy, MissingCommand)
{
  EXPECT_THROW(ExternalPolicy("/nonexistent/policy-binary"), PolicyError);
}

TEST(ExternalPolicy, InlineRasterTransport)
{
  ExternalPolicyOptions opts;
  opts.rasters = RasterTransport::inline_last;
  ExternalPolicy policy(server("count"), opts);
  EXPECT_TRUE(policy.needs_rasters());
  Observation obs = speed_observation(1.0);
  obs.history.insert(obs.history.begin(), {-1, obs.ego, nullptr});
  auto raster = std::make_shared<BevRaster>();
  obs.history.back().raster = raster;
  const Decision d = policy.decide(obs);
  EXPECT_EQ(d.waypoints(0, 0), 1.0);
  EXPECT_EQ(d.waypoints(0, 1), 1.0);
}

}  // namespace
}  // namespace minidrive
