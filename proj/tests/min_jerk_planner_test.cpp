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

#include "minidrive/min_jerk_planner.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace minidrive
{
namespace
{

PlanningProblem straight_problem(double v_max = 2.0)
{
  PlanningProblem pb;
  pb.dt_piece = 1.0;
  pb.start = {{0.0, 0.0}, {1.0, 0.0}};
  pb.end = {{4.0, 0.0}, {1.0, 0.0}};
  pb.waypoints = {{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
  pb.bounds.v_max = v_max;
  pb.bounds.a_max = 1.0;
  return pb;
}

PlanningProblem rest_to_rest(bool pin_accelerations = false)
{
  PlanningProblem pb;
  pb.dt_piece = 1.0;
  pb.start.position = {0.0, 0.0};
  pb.end.position = {1.0, 0.0};
  if (pin_accelerations) {
    pb.start.acceleration = Vec2::Zero();
    pb.end.acceleration = Vec2::Zero();
  }
  return pb;
}

void expect_single_piece(const PlannedTrajectory & pt, const Eigen::Matrix<double, 6, 1> & x)
{
  ASSERT_EQ(pt.traj.num_pieces(), 1);
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(pt.traj.piece(0).coeffs(k, 0), x(k), 1e-9) << "k=" << k;
    EXPECT_NEAR(pt.traj.piece(0).coeffs(k, 1), 0.0, 1e-12);
  }
}

double max_position_gap(const PiecewiseQuintic & a, const PiecewiseQuintic & b, int per_piece = 20)
{
  double worst = 0.0;
  const int n = a.num_pieces() * per_piece;
  for (int i = 0; i <= n; ++i) {
    const double t = a.t0() + (a.t_end() - a.t0()) * i / n;
    worst = std::max(worst, (eval(a, t) - eval(b, t)).norm());
  }
  return worst;
}

TEST(JerkHessian, MatchesQuadrature)
{
  for (const double dt : {0.1, 0.7, 1.0, 2.5}) {
    const auto closed = jerk_hessian(dt);
    const auto numeric = oracle::quadrature_jerk_gram(dt);
    EXPECT_LT((closed - numeric).norm(), 1e-9 * closed.norm()) << "dt=" << dt;
  }
}

TEST(Solve, StraightConstantVelocityHasZeroJerk)
{
  const auto pt = solve(straight_problem());
  EXPECT_NEAR(pt.jerk_cost, 0.0, 1e-12);
  EXPECT_TRUE(pt.feasible);
  EXPECT_NEAR(pt.peak_speed, 1.0, 1e-9);
  for (double t = 0.0; t <= 4.0; t += 0.05) {
    EXPECT_NEAR(eval(pt.traj, t).x(), t, 1e-9);
    EXPECT_NEAR(eval(pt.traj, t).y(), 0.0, 1e-12);
  }
}

TEST(Solve, RestToRestWithFreeAccelerations)
{
  // Endpoint accelerations are free, so the optimum undercuts the classical
  // quintic: x = 2.5 t^2 - 2.5 t^4 + t^5, jerk 60 t^2 - 60 t.
  Eigen::Matrix<double, 6, 1> x;
  x << 0, 0, 2.5, 0, -2.5, 1;
  const auto pt = solve(rest_to_rest());
  expect_single_piece(pt, x);
  EXPECT_NEAR(pt.jerk_cost, 120.0, 1e-9);
}

TEST(Solve, RestToRestWithPinnedAccelerationsIsClassicalQuintic)
{
  Eigen::Matrix<double, 6, 1> x;
  x << 0, 0, 0, 10, -15, 6;
  const auto pt = solve(rest_to_rest(true));
  expect_single_piece(pt, x);
  // Integral of (60 - 360 t + 360 t^2)^2 over [0, 1].
  EXPECT_NEAR(pt.jerk_cost, 720.0, 1e-8);
}

TEST(Solve, RestToRestMatchesPenaltyOracle)
{
  for (const bool pinned : {false, true}) {
    const auto ref = oracle::penalty_solve(rest_to_rest(pinned));
    const auto pt = solve(rest_to_rest(pinned));
    EXPECT_LT((ref.piece(0).coeffs - pt.traj.piece(0).coeffs).norm(), 1e-5) << pinned;
  }
}

TEST(Solve, MatchesPenaltyOracleOnRandomProblems)
{
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> pieces(2, 8);
  std::uniform_real_distribution<double> dts(0.5, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pb = oracle::random_problem(rng, pieces(rng), dts(rng));
    const auto pt = solve(pb);
    const auto ref = oracle::penalty_solve(pb);
    const double ref_cost = oracle::quadrature_jerk_cost(ref);
    EXPECT_LE(std::abs(pt.jerk_cost - ref_cost), 1e-5 * ref_cost) << "trial " << trial;
    EXPECT_LE(max_position_gap(pt.traj, ref), 1e-4) << "trial " << trial;
  }
}

TEST(Solve, ConstraintsHoldToTolerance)
{
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pieces(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pb = oracle::random_problem(rng, pieces(rng), 0.1);
    const auto pt = solve(pb);
    EXPECT_LE(max_constraint_residual(pb, pt.traj), 1e-8) << "trial " << trial;
  }
}

TEST(Solve, NotWorseThanHermiteInterpolants)
{
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pieces(1, 10);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pb = oracle::random_problem(rng, pieces(rng), 0.5);
    const auto pt = solve(pb);
    oracle::KnotData k;
    k.p = oracle::knot_positions(pb);
    const double scale = trial % 2 == 0 ? 1e-3 : 5.0;
    for (size_t n = 0; n < k.p.size(); ++n) {
      const double t = std::min(pt.traj.t0() + n * pb.dt_piece, pt.traj.t_end());
      k.v.push_back(eval(pt.traj, t, 1) + scale * Vec2(unit(rng), unit(rng)));
      k.a.push_back(eval(pt.traj, t, 2) + scale * Vec2(unit(rng), unit(rng)));
    }
    k.v.front() = pb.start.velocity;
    k.v.back() = pb.end.velocity;
    const auto hermite = oracle::hermite_spline(k, pb.dt_piece);
    ASSERT_LE(max_constraint_residual(pb, hermite), 1e-8);
    EXPECT_LE(pt.jerk_cost, oracle::quadrature_jerk_cost(hermite) * (1.0 + 1e-12) + 1e-12)
      << "trial " << trial;
  }
}

TEST(Solve, NullSpacePerturbationIncreasesCost)
{
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pb = oracle::random_problem(rng, 2 + trial % 6, 1.0);
    const auto pt = solve(pb);
    oracle::KnotData k;
    k.p = oracle::knot_positions(pb);
    for (size_t n = 0; n < k.p.size(); ++n) {
      k.v.push_back(Vec2(unit(rng), unit(rng)));
      k.a.push_back(Vec2(unit(rng), unit(rng)));
    }
    k.v.front() = pb.start.velocity;
    k.v.back() = pb.end.velocity;
    const auto other = oracle::hermite_spline(k, pb.dt_piece);
    for (const double eps : {1e-3, 1e-1, 1.0}) {
      std::vector<QuinticPiece> pieces = pt.traj.pieces();
      for (size_t n = 0; n < pieces.size(); ++n) {
        pieces[n].coeffs += eps * (other.pieces()[n].coeffs - pt.traj.pieces()[n].coeffs);
      }
      const PiecewiseQuintic perturbed(pieces, pb.dt_piece);
      EXPECT_LE(max_constraint_residual(pb, perturbed), 1e-8);
      EXPECT_GT(jerk_cost(perturbed), pt.jerk_cost) << "trial " << trial << " eps " << eps;
    }
  }
}

TEST(Solve, AxesDecouple)
{
  std::mt19937_64 rng(5);
  auto pb = oracle::random_problem(rng, 6, 0.1);
  pb.start.position.y() = pb.start.velocity.y() = 0.0;
  pb.end.position.y() = pb.end.velocity.y() = 0.0;
  for (auto & w : pb.waypoints) {
    w.y() = 0.0;
  }
  const auto pt = solve(pb);
  for (const auto & p : pt.traj.pieces()) {
    EXPECT_LT(p.coeffs.col(1).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Solve, TranslationEquivariant)
{
  std::mt19937_64 rng(6);
  const auto pb = oracle::random_problem(rng, 5, 0.3);
  auto moved = pb;
  const Vec2 shift(123.0, -45.0);
  moved.start.position += shift;
  moved.end.position += shift;
  for (auto & w : moved.waypoints) {
    w += shift;
  }
  const auto a = solve(pb);
  const auto b = solve(moved);
  EXPECT_NEAR(a.jerk_cost, b.jerk_cost, 1e-9 * std::max(1.0, a.jerk_cost));
  for (double t = 0.0; t <= a.traj.t_end(); t += 0.05) {
    EXPECT_LT((eval(b.traj, t) - eval(a.traj, t) - shift).norm(), 1e-8);
  }
}

TEST(Solve, IndependentOfKnotTimeScaleWhenNormalized)
{
  // Same geometry on dt and 2*dt with halved boundary velocities: the
  // longer plan is the shorter one slowed down twofold.
  std::mt19937_64 rng(8);
  const auto pb = oracle::random_problem(rng, 4, 0.2);
  auto slow = pb;
  slow.dt_piece = 0.4;
  slow.start.velocity /= 2.0;
  slow.end.velocity /= 2.0;
  const auto a = solve(pb);
  const auto b = solve(slow);
  for (double t = 0.0; t <= a.traj.t_end(); t += 0.01) {
    EXPECT_LT((eval(a.traj, t) - eval(b.traj, 2.0 * t)).norm(), 1e-9);
  }
  EXPECT_NEAR(b.jerk_cost, a.jerk_cost / 32.0, 1e-9 * a.jerk_cost);
}

TEST(Solve, RejectsNonFiniteInput)
{
  auto pb = straight_problem();
  pb.waypoints[1].x() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve(pb), InvalidInputError);
  pb = straight_problem();
  pb.dt_piece = 0.0;
  EXPECT_THROW(solve(pb), InvalidInputError);
}

TEST(Solve, InitialWaypointMustMatchStart)
{
  auto pb = straight_problem();
  pb.initial_waypoint = Vec2(0.0, 5e-7);
  EXPECT_NO_THROW(solve(pb));
  pb.initial_waypoint = Vec2(0.0, 1e-3);
  EXPECT_THROW(solve(pb), InvalidInputError);
}

TEST(Solve, RepeatedWaypointsAreFine)
{
  PlanningProblem pb;
  pb.dt_piece = 0.1;
  pb.waypoints.assign(10, Vec2(0.0, 0.0));
  const auto pt = solve(pb);
  EXPECT_NEAR(pt.jerk_cost, 0.0, 1e-12);
}

TEST(Bounds, ReportModeAnnotates)
{
  const auto pt = solve(straight_problem(2.0));
  EXPECT_TRUE(pt.feasible);
  EXPECT_NEAR(pt.peak_speed, 1.0, 1e-9);
  EXPECT_NEAR(pt.peak_accel, 0.0, 1e-9);
}

TEST(Bounds, RescaleStretchesTime)
{
  auto pb = straight_problem(0.5);
  const auto pt = solve(pb);
  EXPECT_FALSE(pt.feasible);
  const auto scaled = check_and_enforce_bounds(pt, pb.bounds, BoundsMode::rescale);
  EXPECT_TRUE(scaled.feasible);
  EXPECT_NEAR(scaled.traj.dt_piece(), 2.0, 1e-12);
  EXPECT_NEAR(scaled.peak_speed, 0.5, 1e-12);
  for (double t = 0.0; t <= 4.0; t += 0.1) {
    EXPECT_LT((eval(scaled.traj, 2.0 * t) - eval(pt.traj, t)).norm(), 1e-12);
  }
}

TEST(Bounds, RescaleHonorsAcceleration)
{
  auto pb = rest_to_rest();
  pb.bounds.a_max = 1.0;
  const auto pt = check_and_enforce_bounds(solve(pb), pb.bounds, BoundsMode::rescale);
  EXPECT_TRUE(pt.feasible);
  EXPECT_LE(pt.peak_accel, 1.0 + 1e-9);
}

TEST(Bounds, RestToRestPeakAcceleration)
{
  auto pb = rest_to_rest(true);
  const double true_peak = 10.0 / std::sqrt(3.0);
  pb.bounds.a_max = 5.7;
  const auto pt = solve(pb);
  EXPECT_FALSE(pt.feasible);
  // Dense sampling confirms the coarse check lands close to the true peak.
  double dense = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    dense = std::max(dense, eval(pt.traj, i * 1e-4, 2).norm());
  }
  EXPECT_NEAR(dense, true_peak, 1e-6);
  EXPECT_LE(pt.peak_accel, dense);
  EXPECT_GT(pt.peak_accel, 0.99 * dense);
}

TEST(Solve, Fast)
{
  std::mt19937_64 rng(3);
  const auto begin = std::chrono::steady_clock::now();
  for (int i = 0; i < 200; ++i) {
    solve(oracle::random_problem(rng, 40, 0.1));
  }
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  EXPECT_LT(secs, 5.0);
}

}  // namespace
}  // namespace minidrive
