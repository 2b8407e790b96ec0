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

#include "minidrive/metrics.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

namespace minidrive
{
namespace
{

Waypoints random_waypoints(std::mt19937_64 & rng, double scale = 20.0)
{
  std::uniform_real_distribution<double> u(-scale, scale);
  Waypoints w;
  for (int r = 0; r < kDecisionSteps; ++r) {
    w.row(r) << u(rng), u(rng);
  }
  return w;
}

Polyline rows_of(const Waypoints & w)
{
  Polyline out;
  for (int r = 0; r < w.rows(); ++r) {
    out.emplace_back(w.row(r).transpose());
  }
  return out;
}

// Frames 0..n with straight-line positions and the given event frames.
SimTrace synthetic_trace(int n, int collision_at = -1, int offroad_at = -1, double lateral = 0.0)
{
  SimTrace t;
  t.scenario_id = "synthetic";
  for (int f = 0; f <= n; ++f) {
    SimFrame fr;
    fr.frame = f;
    fr.ego = VehicleState(f * 1.0, lateral, 0.0, 10.0);
    fr.events.collision = collision_at >= 0 && f >= collision_at;
    fr.events.offroad = offroad_at >= 0 && f >= offroad_at;
    t.frames.push_back(fr);
  }
  return t;
}

std::vector<Vec2> straight_reference(int n)
{
  std::vector<Vec2> out;
  for (int f = 0; f <= n; ++f) {
    out.emplace_back(f * 1.0, 0.0);
  }
  return out;
}

TEST(HorizonFrames, Mapping)
{
  EXPECT_EQ(horizon_frames(0.5), 5);
  EXPECT_EQ(horizon_frames(1.0), 10);
  EXPECT_EQ(horizon_frames(2.0), 20);
  EXPECT_EQ(horizon_frames(3.0), 30);
  EXPECT_EQ(horizon_frames(4.0), 40);
  EXPECT_THROW(horizon_frames(4.1), DomainError);
  EXPECT_THROW(horizon_frames(0.05), DomainError);
  EXPECT_THROW(horizon_frames(0.0), DomainError);
}

TEST(AdeFde, Identical)
{
  std::mt19937_64 rng(1);
  const Waypoints w = random_waypoints(rng);
  for (const double h : kHorizons) {
    const auto d = ade_fde(w, w, horizon_frames(h));
    EXPECT_EQ(d.average, 0.0);
    EXPECT_EQ(d.final, 0.0);
  }
}

TEST(AdeFde, ConstantOffsetIsExact)
{
  std::mt19937_64 rng(2);
  const Waypoints ref = random_waypoints(rng, 4.0);
  Waypoints pred = ref;
  pred.col(0).array() += 1.0;
  for (const double h : kHorizons) {
    const auto d = ade_fde(pred, ref, horizon_frames(h));
    EXPECT_NEAR(d.average, 1.0, 1e-12);
    EXPECT_NEAR(d.final, 1.0, 1e-12);
  }
  // An offset that is exact in binary gives exactly the offset.
  const Waypoints zero = Waypoints::Zero();
  Waypoints shifted = zero;
  shifted.col(1).setConstant(0.75);
  const auto d = ade_fde(shifted, zero, 40);
  EXPECT_EQ(d.average, 0.75);
  EXPECT_EQ(d.final, 0.75);
}

TEST(AdeFde, ArithmeticSeries)
{
  const Waypoints ref = Waypoints::Zero();
  Waypoints pred = ref;
  for (int k = 1; k <= 40; ++k) {
    pred(k - 1, 0) = 0.01 * k;
  }
  const auto d = ade_fde(pred, ref, 40);
  EXPECT_NEAR(d.final, 0.4, 1e-12);
  EXPECT_NEAR(d.average, 0.205, 1e-12);
  // Squared averaging: mean of (0.01k)^2 = 1e-4 * 41 * 81 / 6.
  const auto s = ade_fde(pred, ref, 40, Averaging::squared);
  EXPECT_NEAR(s.average, 1e-4 * 41.0 * 81.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.final, 0.4, 1e-12);
  // Horizon 5 averages rows 0..4 only.
  EXPECT_NEAR(ade_fde(pred, ref, 5).average, 0.03, 1e-12);
  EXPECT_NEAR(ade_fde(pred, ref, 5).final, 0.05, 1e-12);
}

TEST(AdeFde, HorizonBounds)
{
  const Waypoints w = Waypoints::Zero();
  EXPECT_THROW(ade_fde(w, w, 41), DomainError);
  EXPECT_THROW(ade_fde(w, w, 0), DomainError);
  EXPECT_THROW(adr_fdr(w, {}, 10), InvalidInputError);
}

TEST(AdrFdr, Examples)
{
  std::mt19937_64 rng(3);
  const Waypoints w = random_waypoints(rng);
  const auto on = adr_fdr(w, rows_of(w), 40);
  EXPECT_EQ(on.average, 0.0);
  EXPECT_EQ(on.final, 0.0);

  // Dense straight reference, prediction 1 m to the side.
  Polyline dense;
  for (int i = -100; i <= 1000; ++i) {
    dense.emplace_back(0.05 * i, 0.0);
  }
  Waypoints side;
  for (int k = 1; k <= 40; ++k) {
    side.row(k - 1) << 0.3 * k, 1.0;
  }
  const auto lat = adr_fdr(side, dense, 40);
  EXPECT_NEAR(lat.average, 1.0, 1e-12);
  EXPECT_NEAR(lat.final, 1.0, 1e-12);

  // Same path but twice as fast: on the reference yet behind schedule.
  Waypoints ref;
  Waypoints fast;
  for (int k = 1; k <= 40; ++k) {
    ref.row(k - 1) << 0.5 * k, 0.0;
    fast.row(k - 1) << 0.5 * std::min(2 * k, 40), 0.0;
  }
  EXPECT_EQ(adr_fdr(fast, rows_of(ref), 20).final, 0.0);
  EXPECT_GT(ade_fde(fast, ref, 20).final, 0.0);
}

TEST(AdrFdr, NeverExceedsSameIndexError)
{
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int i = 0; i < 1000; ++i) {
    const Waypoints pred = random_waypoints(rng);
    const Waypoints ref = random_waypoints(rng);
    const int h = horizon_frames(kHorizons[static_cast<size_t>(pick(rng))]);
    const auto d = ade_fde(pred, ref, h);
    const auto r = adr_fdr(pred, rows_of(ref), h);
    ASSERT_LE(r.final, d.final + 1e-12);
    ASSERT_LE(r.average, d.average + 1e-12);
  }
}

TEST(AdrFdr, MatchesBruteForceNearestWaypoint)
{
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Waypoints pred = random_waypoints(rng);
    const Waypoints ref = random_waypoints(rng);
    double sum = 0.0;
    double last = 0.0;
    for (int k = 0; k < 30; ++k) {
      double best = INFINITY;
      for (int j = 0; j < 40; ++j) {
        best = std::min(best, (pred.row(k) - ref.row(j)).norm());
      }
      sum += best;
      last = best;
    }
    const auto r = adr_fdr(pred, rows_of(ref), 30);
    EXPECT_NEAR(r.average, sum / 30.0, 1e-12);
    EXPECT_NEAR(r.final, last, 1e-12);
  }
}

TEST(AverageBounds, BetweenMinAndMaxFrameError)
{
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Waypoints pred = random_waypoints(rng);
    const Waypoints ref = random_waypoints(rng);
    const Eigen::VectorXd e = (pred - ref).rowwise().norm().head(20);
    const double ade = ade_fde(pred, ref, 20).average;
    EXPECT_LE(ade, e.maxCoeff() + 1e-12);
    EXPECT_GE(ade, e.minCoeff() - 1e-12);
  }
}

TEST(Metrics, RigidTransformInvariant)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 20; ++i) {
    const Waypoints pred = random_waypoints(rng);
    const Waypoints ref = random_waypoints(rng);
    const Eigen::Rotation2Dd R(u(rng));
    const Eigen::RowVector2d t(u(rng), u(rng));
    const Waypoints pm = (pred * R.toRotationMatrix().transpose()).rowwise() + t;
    const Waypoints rm = (ref * R.toRotationMatrix().transpose()).rowwise() + t;
    const auto a = ade_fde(pred, ref, 40);
    const auto b = ade_fde(pm, rm, 40);
    EXPECT_NEAR(a.average, b.average, 1e-9);
    EXPECT_NEAR(a.final, b.final, 1e-9);
    const auto c = adr_fdr(pred, rows_of(ref), 40);
    const auto d = adr_fdr(pm, rows_of(rm), 40);
    EXPECT_NEAR(c.average, d.average, 1e-9);
    EXPECT_NEAR(c.final, d.final, 1e-9);
  }
}

TEST(ClosedLoop, IdenticalToLog)
{
  const std::vector<SimTrace> traces(3, synthetic_trace(40));
  const std::vector<std::vector<Vec2>> refs(3, straight_reference(40));
  const auto m = closed_loop_metrics(traces, refs, 40);
  EXPECT_EQ(m.l2, 0.0);
  EXPECT_EQ(m.cr, 0.0);
  EXPECT_EQ(m.or_rate, 0.0);
  EXPECT_EQ(m.scenes, 3);
}

TEST(ClosedLoop, HandCounts)
{
  std::vector<SimTrace> traces(50, synthetic_trace(40));
  traces[17] = synthetic_trace(40, 12);
  const std::vector<std::vector<Vec2>> refs(50, straight_reference(40));
  EXPECT_NEAR(closed_loop_metrics(traces, refs, 40).cr, 0.02, 1e-15);
  EXPECT_EQ(closed_loop_metrics(traces, refs, 10).cr, 0.0);

  traces[3] = synthetic_trace(40, -1, 4);
  traces[4] = synthetic_trace(40, 30, 25);
  const auto m = closed_loop_metrics(traces, refs, 40);
  EXPECT_NEAR(m.cr, 2.0 / 50.0, 1e-15);
  EXPECT_NEAR(m.or_rate, 2.0 / 50.0, 1e-15);
  EXPECT_NEAR(closed_loop_metrics(traces, refs, 5).or_rate, 1.0 / 50.0, 1e-15);
}

TEST(ClosedLoop, ConstantOffset)
{
  const std::vector<SimTrace> traces(4, synthetic_trace(40, -1, -1, 1.0));
  const std::vector<std::vector<Vec2>> refs(4, straight_reference(40));
  for (const double h : kHorizons) {
    EXPECT_EQ(closed_loop_metrics(traces, refs, horizon_frames(h)).l2, 1.0);
  }
  EXPECT_EQ(closed_loop_metrics(traces, refs, 40, Averaging::squared).l2, 1.0);
}

TEST(ClosedLoop, MonotoneInHorizon)
{
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> at(-20, 40);
  std::vector<SimTrace> traces;
  for (int i = 0; i < 30; ++i) {
    traces.push_back(synthetic_trace(40, at(rng), at(rng)));
  }
  const std::vector<std::vector<Vec2>> refs(30, straight_reference(40));
  double cr = 0.0;
  double orr = 0.0;
  for (const double h : kHorizons) {
    const auto m = closed_loop_metrics(traces, refs, horizon_frames(h));
    EXPECT_GE(m.cr, cr);
    EXPECT_GE(m.or_rate, orr);
    EXPECT_LE(m.cr, 1.0);
    EXPECT_LE(m.or_rate, 1.0);
    cr = m.cr;
    orr = m.or_rate;
  }
}

TEST(ClosedLoop, Errors)
{
  EXPECT_THROW(closed_loop_metrics({}, {}, 10), DomainError);
  EXPECT_THROW(closed_loop_metrics({synthetic_trace(8)}, {straight_reference(8)}, 10), InvalidInputError);
  EXPECT_THROW(closed_loop_metrics({synthetic_trace(40)}, {}, 10), InvalidInputError);
}

TEST(Report, LayoutAndAverages)
{
  std::mt19937_64 rng(9);
  const Waypoints ref = random_waypoints(rng);
  Waypoints pred = ref;
  pred.col(0).array() += 0.5;
  const std::vector<OpenLoopSample> open{{pred, ref}};
  const std::vector<SimTrace> traces{synthetic_trace(40, 35), synthetic_trace(40)};
  const std::vector<std::vector<Vec2>> refs(2, straight_reference(40));
  const std::vector<double> hs(kHorizons.begin(), kHorizons.end());
  const MetricReport report = build_report(open, traces, refs, hs);
  EXPECT_EQ(report.scenes, 2);
  EXPECT_NEAR(report.values[0][4], 0.5, 1e-12);
  EXPECT_NEAR(report.values[1][0], 0.5, 1e-12);
  EXPECT_EQ(report.values[5][3], 0.0);
  EXPECT_EQ(report.values[5][4], 0.5);
  EXPECT_NEAR(report.average(5), 0.1, 1e-15);

  const std::string csv = report.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,0.5,1,2,3,4,avg");
  EXPECT_NE(csv.find("\nCR,0,0,0,0,0.5,0.1\n"), std::string::npos);
  const nlohmann::json j = report.to_json();
  EXPECT_EQ(j.at("scenes"), 2);
  EXPECT_TRUE(j.contains("metrics"));

  const MetricReport closed_only = build_report({}, traces, refs, hs);
  EXPECT_TRUE(std::isnan(closed_only.values[0][0]));
  EXPECT_FALSE(std::isnan(closed_only.values[4][0]));
}

TEST(LoggedPositions, Range)
{
  Scenario sc;
  for (int f = 0; f < 10; ++f) {
    sc.ego_log.emplace_back(f, 0, 0, 1);
  }
  const auto p = logged_positions(sc, 3, 7);
  ASSERT_EQ(p.size(), 7U);
  EXPECT_EQ(p.front(), Vec2(3, 0));
  EXPECT_THROW(logged_positions(sc, 4, 7), HorizonError);
}

}  // namespace
}  // namespace minidrive
