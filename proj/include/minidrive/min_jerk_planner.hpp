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

#ifndef MINIDRIVE_MIN_JERK_PLANNER_HPP_
#define MINIDRIVE_MIN_JERK_PLANNER_HPP_

#include "minidrive/common.hpp"
#include "minidrive/flat_vehicle.hpp"
#include "minidrive/trajectory.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <tuple>
#include <optional>
#include <vector>

namespace minidrive
{

template <typename Scalar>
struct BoundaryStateT
{
  Vec2T<Scalar> position{Vec2T<Scalar>::Zero()};
  Vec2T<Scalar> velocity{Vec2T<Scalar>::Zero()};
  /// Left free unless set; pinning it adds one constraint per axis.
  std::optional<Vec2T<Scalar>> acceleration;
};

/// Minimum-jerk problem over M = waypoints.size() + 1 uniform pieces.
///
/// `waypoints` are the interior knot positions p_1..p_{M-1}. The first knot
/// is the start position; a caller may also pass it explicitly in
/// `initial_waypoint`, in which case it must agree with `start.position`.
template <typename Scalar>
struct PlanningProblemT
{
  BoundaryStateT<Scalar> start;
  BoundaryStateT<Scalar> end;
  std::vector<Vec2T<Scalar>> waypoints;
  Scalar dt_piece{Scalar(0.1)};
  VehicleParams bounds;
  std::optional<Vec2T<Scalar>> initial_waypoint;

  int num_pieces() const { return static_cast<int>(waypoints.size()) + 1; }
};

template <typename Scalar>
struct PlannedTrajectoryT
{
  PiecewiseQuinticT<Scalar> traj;
  Scalar jerk_cost{0};
  bool feasible{false};
  Scalar peak_speed{0};
  Scalar peak_accel{0};
};

using BoundaryState = BoundaryStateT<double>;
using PlanningProblem = PlanningProblemT<double>;
using PlannedTrajectory = PlannedTrajectoryT<double>;

enum class BoundsMode
{
  report,
  rescale,
};

template <typename Scalar>
PlannedTrajectoryT<Scalar> check_and_enforce_bounds(
  PlannedTrajectoryT<Scalar> pt, const VehicleParams & bounds, BoundsMode mode);

/// Tolerance on |start.position - initial_waypoint|.
inline constexpr double kInitialWaypointTolerance = 1e-6;

/// Gram matrix of the jerk of a quintic on [0, dt]:
/// H[i][j] = (i!/(i-3)!)(j!/(j-3)!) dt^(i+j-5) / (i+j-5) for i, j >= 3.
template <typename Scalar>
Eigen::Matrix<Scalar, 6, 6> jerk_hessian(Scalar dt)
{
  Eigen::Matrix<Scalar, 6, 6> h = Eigen::Matrix<Scalar, 6, 6>::Zero();
  const Scalar falling[6] = {0, 0, 0, 6, 24, 60};
  for (int i = 3; i < 6; ++i) {
    for (int j = 3; j < 6; ++j) {
      const int p = i + j - 5;
      h(i, j) = falling[i] * falling[j] * std::pow(dt, static_cast<Scalar>(p)) / static_cast<Scalar>(p);
    }
  }
  return h;
}

/// Sum over pieces and axes of the integral of squared jerk.
template <typename Scalar>
Scalar jerk_cost(const PiecewiseQuinticT<Scalar> & traj)
{
  const Eigen::Matrix<Scalar, 6, 6> h = jerk_hessian(traj.dt_piece());
  Scalar cost = 0;
  for (const auto & piece : traj.pieces()) {
    cost += (piece.coeffs.transpose() * h * piece.coeffs).trace();
  }
  return cost;
}

namespace detail
{

template <typename Scalar>
void validate_problem(const PlanningProblemT<Scalar> & problem)
{
  auto finite = [](const Vec2T<Scalar> & v) { return v.allFinite(); };
  bool ok = finite(problem.start.position) && finite(problem.start.velocity) &&
            finite(problem.end.position) && finite(problem.end.velocity) &&
            std::isfinite(problem.dt_piece);
  for (const auto & w : problem.waypoints) {
    ok = ok && finite(w);
  }
  if (problem.initial_waypoint) {
    ok = ok && finite(*problem.initial_waypoint);
  }
  if (problem.start.acceleration) {
    ok = ok && finite(*problem.start.acceleration);
  }
  if (problem.end.acceleration) {
    ok = ok && finite(*problem.end.acceleration);
  }
  if (!ok) {
    throw InvalidInputError("planning problem contains non-finite values");
  }
  if (!(problem.dt_piece > Scalar(0))) {
    throw InvalidInputError("planning problem needs dt_piece > 0");
  }
  if (
    problem.initial_waypoint &&
    (*problem.initial_waypoint - problem.start.position).norm() >
      Scalar(kInitialWaypointTolerance)) {
    throw InvalidInputError("initial waypoint disagrees with the start position");
  }
}

// d^s/ds^s of the monomial basis 1, s, .., s^5 at s in {0, 1}.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 6> basis_derivative(int order, bool at_end)
{
  Eigen::Matrix<Scalar, 1, 6> row = Eigen::Matrix<Scalar, 1, 6>::Zero();
  for (int k = order; k < 6; ++k) {
    Scalar falling = 1;
    for (int j = 0; j < order; ++j) {
      falling *= static_cast<Scalar>(k - j);
    }
    row(k) = (at_end || k == order) ? falling : Scalar(0);
  }
  return row;
}

}  // namespace detail

namespace detail
{

inline int num_constraints(int m, bool pin_start_accel, bool pin_end_accel)
{
  return 4 * m + (pin_start_accel ? 1 : 0) + (pin_end_accel ? 1 : 0);
}

/// Unit-time KKT matrix for m pieces. Constraint rows, in order: start
/// position, start velocity, interior knot positions, C0/C1/C2 continuity at
/// each shared knot, end position, end velocity, then the pinned start and
/// end accelerations if requested.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> unit_kkt_matrix(
  int m, bool pin_start_accel, bool pin_end_accel)
{
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int nv = 6 * m;
  const int nc = num_constraints(m, pin_start_accel, pin_end_accel);
  Matrix kkt = Matrix::Zero(nv + nc, nv + nc);
  const Eigen::Matrix<Scalar, 6, 6> h_unit = jerk_hessian(Scalar(1));
  for (int n = 0; n < m; ++n) {
    kkt.block(6 * n, 6 * n, 6, 6) = h_unit;
  }
  int row = nv;
  auto put = [&](int piece, const Eigen::Matrix<Scalar, 1, 6> & coeffs) {
    kkt.block(row, 6 * piece, 1, 6) = coeffs;
  };
  put(0, basis_derivative<Scalar>(0, false));
  ++row;
  put(0, basis_derivative<Scalar>(1, false));
  ++row;
  for (int n = 1; n < m; ++n, ++row) {
    put(n, basis_derivative<Scalar>(0, false));
  }
  for (int n = 0; n + 1 < m; ++n) {
    for (int s = 0; s < 3; ++s, ++row) {
      put(n, basis_derivative<Scalar>(s, true));
      put(n + 1, -basis_derivative<Scalar>(s, false));
    }
  }
  put(m - 1, basis_derivative<Scalar>(0, true));
  ++row;
  put(m - 1, basis_derivative<Scalar>(1, true));
  ++row;
  if (pin_start_accel) {
    put(0, basis_derivative<Scalar>(2, false));
    ++row;
  }
  if (pin_end_accel) {
    put(m - 1, basis_derivative<Scalar>(2, true));
  }
  // Constraint block is symmetric: A^T in the upper right.
  kkt.block(0, nv, nv, nc) = kkt.block(nv, 0, nc, nv).transpose();
  return kkt;
}

/// The unit-time KKT matrix depends only on its shape, so its factorization
/// is cached per thread.
template <typename Scalar>
const Eigen::FullPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> & unit_kkt_lu(
  int m, bool pin_start_accel, bool pin_end_accel)
{
  using Lu = Eigen::FullPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;
  thread_local std::map<std::tuple<int, bool, bool>, std::unique_ptr<Lu>> cache;
  auto & slot = cache[{m, pin_start_accel, pin_end_accel}];
  if (!slot) {
    slot = std::make_unique<Lu>(unit_kkt_matrix<Scalar>(m, pin_start_accel, pin_end_accel));
  }
  return *slot;
}

}  // namespace detail

/// Solves the equality-constrained minimum-jerk QP through its KKT system.
///
/// Each piece is parameterized on the unit interval (coefficients scaled by
/// dt^k) so the KKT matrix is independent of dt; both axes share one
/// factorization. Eq. constraints: start/end position and velocity, interior
/// knot positions, and C0/C1/C2 continuity at shared knots. Endpoint
/// accelerations are free unless the boundary states pin them. Dynamic bounds are not part of the QP; the result
/// is annotated by check_and_enforce_bounds in report mode.
template <typename Scalar>
PlannedTrajectoryT<Scalar> solve(const PlanningProblemT<Scalar> & problem)
{
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::validate_problem(problem);

  const int m = problem.num_pieces();
  const int nv = 6 * m;
  const bool pin_start = problem.start.acceleration.has_value();
  const bool pin_end = problem.end.acceleration.has_value();
  const int nc = detail::num_constraints(m, pin_start, pin_end);
  const Scalar dt = problem.dt_piece;

  // Right-hand side in the row order of unit_kkt_matrix; derivative
  // constraints of order s are scaled by dt^s in unit time.
  Matrix rhs = Matrix::Zero(nv + nc, 2);
  int row = nv;
  rhs.row(row++) = problem.start.position.transpose();
  rhs.row(row++) = (problem.start.velocity * dt).transpose();
  for (int n = 1; n < m; ++n) {
    rhs.row(row++) = problem.waypoints[static_cast<size_t>(n - 1)].transpose();
  }
  row += 3 * (m - 1);
  rhs.row(row++) = problem.end.position.transpose();
  rhs.row(row++) = (problem.end.velocity * dt).transpose();
  if (pin_start) {
    rhs.row(row++) = (*problem.start.acceleration * dt * dt).transpose();
  }
  if (pin_end) {
    rhs.row(row) = (*problem.end.acceleration * dt * dt).transpose();
  }

  const auto & lu = detail::unit_kkt_lu<Scalar>(m, pin_start, pin_end);
  if (!lu.isInvertible()) {
    throw SolverError("minimum-jerk KKT system is singular");
  }
  const Matrix sol = lu.solve(rhs);
  if (!sol.allFinite()) {
    throw SolverError("minimum-jerk KKT solve produced non-finite coefficients");
  }

  std::vector<QuinticPieceT<Scalar>> pieces(static_cast<size_t>(m));
  for (int n = 0; n < m; ++n) {
    Scalar scale = 1;
    for (int k = 0; k < 6; ++k) {
      pieces[static_cast<size_t>(n)].coeffs.row(k) = sol.row(6 * n + k) / scale;
      scale *= dt;
    }
  }

  PlannedTrajectoryT<Scalar> out{PiecewiseQuinticT<Scalar>(std::move(pieces), dt, Scalar(0))};
  out.jerk_cost = jerk_cost(out.traj);
  return check_and_enforce_bounds(std::move(out), problem.bounds, BoundsMode::report);
}

/// Largest violation of the boundary, waypoint and continuity equalities,
/// derivative residuals in their physical units.
template <typename Scalar>
Scalar max_constraint_residual(
  const PlanningProblemT<Scalar> & problem, const PiecewiseQuinticT<Scalar> & traj)
{
  const int m = traj.num_pieces();
  if (m != problem.num_pieces()) {
    throw InvalidInputError("trajectory piece count does not match the problem");
  }
  const Scalar dt = traj.dt_piece();
  Scalar worst = 0;
  auto track = [&worst](const Vec2T<Scalar> & r) {
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  };
  const auto & first = traj.piece(0);
  const auto & last = traj.piece(m - 1);
  track(eval_piece(first, Scalar(0), 0) - problem.start.position);
  track(eval_piece(first, Scalar(0), 1) - problem.start.velocity);
  track(eval_piece(last, dt, 0) - problem.end.position);
  track(eval_piece(last, dt, 1) - problem.end.velocity);
  if (problem.start.acceleration) {
    track(eval_piece(first, Scalar(0), 2) - *problem.start.acceleration);
  }
  if (problem.end.acceleration) {
    track(eval_piece(last, dt, 2) - *problem.end.acceleration);
  }
  for (int n = 1; n < m; ++n) {
    track(eval_piece(traj.piece(n), Scalar(0), 0) - problem.waypoints[static_cast<size_t>(n - 1)]);
    for (int s = 0; s < 3; ++s) {
      track(eval_piece(traj.piece(n - 1), dt, s) - eval_piece(traj.piece(n), Scalar(0), s));
    }
  }
  return worst;
}

/// Samples speed and acceleration norms at dt_piece/10 on every piece (both
/// endpoints included) and marks feasibility against `bounds`. In rescale
/// mode an infeasible trajectory is uniformly time-dilated by the smallest
/// kappa >= 1 meeting both bounds: dt <- kappa dt, f_k <- f_k / kappa^k.
template <typename Scalar>
PlannedTrajectoryT<Scalar> check_and_enforce_bounds(
  PlannedTrajectoryT<Scalar> pt, const VehicleParams & bounds, BoundsMode mode)
{
  bounds.validate();
  constexpr int kSamplesPerPiece = 10;
  constexpr Scalar kRelTol = Scalar(1e-9);
  const auto peaks = [](const PiecewiseQuinticT<Scalar> & traj) {
    Scalar speed = 0;
    Scalar accel = 0;
    const Scalar dt = traj.dt_piece();
    for (const auto & piece : traj.pieces()) {
      for (int j = 0; j <= kSamplesPerPiece; ++j) {
        const Scalar tau = dt * static_cast<Scalar>(j) / static_cast<Scalar>(kSamplesPerPiece);
        speed = std::max(speed, eval_piece(piece, tau, 1).norm());
        accel = std::max(accel, eval_piece(piece, tau, 2).norm());
      }
    }
    return std::pair<Scalar, Scalar>{speed, accel};
  };

  const Scalar v_max = static_cast<Scalar>(bounds.v_max);
  const Scalar a_max = static_cast<Scalar>(bounds.a_max);
  const auto within = [&](Scalar speed, Scalar accel) {
    return speed <= v_max * (Scalar(1) + kRelTol) && accel <= a_max * (Scalar(1) + kRelTol);
  };

  auto [speed, accel] = peaks(pt.traj);
  pt.peak_speed = speed;
  pt.peak_accel = accel;
  pt.feasible = within(speed, accel);
  if (pt.feasible || mode == BoundsMode::report) {
    return pt;
  }

  const Scalar kappa = std::max({Scalar(1), speed / v_max, std::sqrt(accel / a_max)});
  std::vector<QuinticPieceT<Scalar>> pieces = pt.traj.pieces();
  for (auto & piece : pieces) {
    Scalar scale = 1;
    for (int k = 0; k < 6; ++k) {
      piece.coeffs.row(k) /= scale;
      scale *= kappa;
    }
  }
  PlannedTrajectoryT<Scalar> out{
    PiecewiseQuinticT<Scalar>(std::move(pieces), pt.traj.dt_piece() * kappa, pt.traj.t0())};
  out.jerk_cost = jerk_cost(out.traj);
  std::tie(out.peak_speed, out.peak_accel) = peaks(out.traj);
  out.feasible = within(out.peak_speed, out.peak_accel);
  return out;
}

}  // namespace minidrive

#endif  // MINIDRIVE_MIN_JERK_PLANNER_HPP_
