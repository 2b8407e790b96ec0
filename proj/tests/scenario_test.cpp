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
#include "minidrive/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace minidrive
{
namespace
{

namespace fs = std::filesystem;

Scenario uniform_scenario(int frames, double speed)
{
  Scenario sc;
  sc.id = "uniform";
  for (int f = 0; f < frames; ++f) {
    sc.ego_log.emplace_back(speed * kFrameDt * f, 0.0, 0.0, speed);
  }
  return sc;
}

std::string header(const std::string & extra = "")
{
  return R"({"schema_version":1,"id":"t","dt":0.1,"agents":[{"id":"a","kind":"vehicle","length":4,"width":2}])" +
    extra + "}\n";
}

std::string frame_line(int f, const std::string & agents = "[]")
{
  return R"({"frame":)" + std::to_string(f) + R"(,"ego":{"px":0,"py":0,"theta":0,"v":1},"agents":)" +
    agents + "}\n";
}

ParseError parse_error_of(const std::string & text)
{
  std::istringstream is(text);
  try {
    parse_scenario(is, "mem.jsonl");
  } catch (const ParseError & e) {
    return e;
  }
  ADD_FAILURE() << "expected a parse error";
  return ParseError("", 0, "", "");
}

class ScenarioFiles : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
      ("minidrive_scenario_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(ScenarioFiles, EmptyDirectory)
{
  EXPECT_TRUE(load_scenarios(dir_).empty());
  EXPECT_THROW(load_scenarios(dir_ / "missing"), ParseError);
}

TEST(LoadScenarios, BundledStraightRoad)
{
  const Scenario sc = load_scenario_file(fs::path(MINIDRIVE_FIXTURE_DIR) / "straight_road.jsonl");
  EXPECT_EQ(sc.id, "straight_road");
  EXPECT_EQ(sc.num_frames(), 300);
  EXPECT_EQ(sc.dt, 0.1);
  const auto all = load_scenarios(MINIDRIVE_FIXTURE_DIR);
  EXPECT_EQ(all.size(), 6U);
}

TEST(ParseScenario, WrongDtNamesField)
{
  std::string text = header();
  text.replace(text.find("0.1"), 3, "0.2");
  const ParseError e = parse_error_of(text + frame_line(0));
  EXPECT_EQ(e.field(), "dt");
  EXPECT_EQ(e.line(), 1);
  EXPECT_EQ(e.code(), "E_PARSE");
}

TEST(ParseScenario, ErrorsCarryLineNumbers)
{
  EXPECT_EQ(parse_error_of(header() + frame_line(0) + frame_line(2)).line(), 3);
  EXPECT_EQ(parse_error_of(header() + frame_line(0) + "{not json\n").field(), "<json>");
  const ParseError unknown = parse_error_of(header() + frame_line(0, R"([{"id":"b","x":0,"y":0,"heading":0}])"));
  EXPECT_EQ(unknown.line(), 2);
  EXPECT_EQ(unknown.field(), "agents[0].id");
  const ParseError missing = parse_error_of(header() + frame_line(0, R"([{"id":"a","x":0,"heading":0}])"));
  EXPECT_EQ(missing.field(), "agents[0].y");
  EXPECT_EQ(parse_error_of(R"({"schema_version":2,"id":"t","dt":0.1})" "\n").field(), "schema_version");
  std::string neg = header() + frame_line(0);
  neg.replace(neg.find(R"("v":1)"), 5, R"("v":-1)");
  EXPECT_EQ(parse_error_of(neg).field(), "ego.v");
  EXPECT_EQ(parse_error_of("").field(), "<header>");
}

TEST(ParseScenario, AgentGaps)
{
  std::istringstream is(
    header() + frame_line(0, R"([{"id":"a","x":1,"y":2,"heading":0.5}])") + frame_line(1) +
    frame_line(2, R"([{"id":"a","x":3,"y":2,"heading":0.5}])"));
  const Scenario sc = parse_scenario(is, "mem");
  ASSERT_EQ(sc.agents.size(), 1U);
  EXPECT_TRUE(sc.agents[0].box_at(0).has_value());
  EXPECT_FALSE(sc.agents[0].box_at(1).has_value());
  EXPECT_EQ(sc.agent_boxes(2).size(), 1U);
  EXPECT_EQ(sc.agent_boxes(2)[0].center, Vec2(3, 2));
  EXPECT_TRUE(sc.agent_boxes(7).empty());
}

TEST(WriteScenario, RoundTripIsExact)
{
  for (const Scenario & sc : fixtures::basic_set(7)) {
    std::ostringstream os;
    write_scenario(sc, os);
    std::istringstream is(os.str());
    const Scenario back = parse_scenario(is, sc.id);
    EXPECT_TRUE(back == sc) << sc.id;
    std::ostringstream again;
    write_scenario(back, again);
    EXPECT_EQ(again.str(), os.str());
  }
}

TEST_F(ScenarioFiles, SaveAndLoad)
{
  const Scenario sc = fixtures::red_light_stop();
  save_scenario(sc, dir_ / "x.jsonl");
  EXPECT_TRUE(load_scenario_file(dir_ / "x.jsonl") == sc);
  ASSERT_EQ(sc.traffic_lights.size(), 1U);
  EXPECT_EQ(sc.traffic_lights[0].state_at(0), LightState::red);
}

TEST(FilterAndExtract, LengthRule)
{
  EXPECT_TRUE(filter_and_extract({uniform_scenario(239, 5.0)}).empty());
  const auto records = filter_and_extract({uniform_scenario(240, 5.0)});
  ASSERT_EQ(records.size(), 200U);
  EXPECT_EQ(records.front().frame, 0);
  EXPECT_EQ(records.back().frame, 199);
  EXPECT_EQ(records.back().target_positions.rows(), 40);
  EXPECT_EQ(records.back().target_positions.cols(), 2);
  EXPECT_EQ(records[5].current_bev.path(), "bev/uniform_5.bin");
  EXPECT_EQ(records[5].next_bev.path(), "bev/uniform_6.bin");
  EXPECT_EQ(records[5].next_env.path(), "env/uniform_6.bin");
  for (const auto & r : records) {
    EXPECT_LT(r.frame + 40, 240);
  }
}

TEST(FilterAndExtract, ConstantVelocityTargetsAreExact)
{
  for (const auto & r : filter_and_extract({uniform_scenario(260, 5.0)})) {
    for (int k = 1; k <= 40; ++k) {
      ASSERT_EQ(r.target_positions(k - 1, 0), 0.5 * k);
      ASSERT_EQ(r.target_positions(k - 1, 1), 0.0);
    }
  }
}

TEST(FilterAndExtract, RigidTransformInvariant)
{
  const Scenario sc = fixtures::multi_agent_road(3);
  const auto base = filter_and_extract({sc});
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double rot = u(rng) / 50.0;
    const Eigen::Rotation2Dd R(rot);
    const Vec2 t(u(rng), u(rng));
    Scenario moved = sc;
    for (auto & s : moved.ego_log) {
      const Vec2 p = R * s.position() + t;
      s = VehicleState(p.x(), p.y(), s.theta + rot, s.v);
    }
    const auto recs = filter_and_extract({moved});
    ASSERT_EQ(recs.size(), base.size());
    for (size_t i = 0; i < recs.size(); ++i) {
      ASSERT_LT((recs[i].target_positions - base[i].target_positions).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(EgoFrameFuture, HorizonError)
{
  const Scenario sc = uniform_scenario(100, 1.0);
  EXPECT_NO_THROW(ego_frame_future(sc, 59));
  EXPECT_THROW(ego_frame_future(sc, 60), HorizonError);
  EXPECT_THROW(ego_frame_future(sc, -1), HorizonError);
}

TEST(Fixtures, Shapes)
{
  EXPECT_EQ(fixtures::paper_scenes().size(), 4U);
  EXPECT_EQ(fixtures::basic_set().size(), 5U);
  EXPECT_EQ(fixtures::straight_road().num_frames(), 300);
  for (const auto & sc : fixtures::basic_set()) {
    EXPECT_GE(sc.num_frames(), kMinScenarioFrames) << sc.id;
  }
  // Generation is deterministic in the seed.
  EXPECT_TRUE(fixtures::multi_agent_road(5) == fixtures::multi_agent_road(5));
}

TEST(EgoPath, StartsAtFrame)
{
  const Scenario sc = uniform_scenario(10, 1.0);
  const Polyline p = ego_path(sc, 4);
  ASSERT_EQ(p.size(), 6U);
  EXPECT_EQ(p.front(), Vec2(0.4, 0.0));
}

}  // namespace
}  // namespace minidrive
