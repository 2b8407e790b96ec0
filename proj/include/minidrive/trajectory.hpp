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

#ifndef MINIDRIVE_TRAJECTORY_HPP_
#define MINIDRIVE_TRAJECTORY_HPP_

#include "minidrive/common.hpp"
#include "minidrive/flat_vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace minidrive
{

/// One quintic piece in local time tau in [0, dt_piece].
/// Column 0 holds the x coefficients f_0..f_5, column 1 the y coefficients.
template <typename Scalar>
struct QuinticPieceT
{
  using Coeffs = Eigen::Matrix<Scalar, 6, 2>;
  Coeffs coeffs{Coeffs::Zero()};
};

/// Uniform-knot piecewise quintic over [t0, t0 + M * dt_piece].
template <typename Scalar>
class PiecewiseQuinticT
{
public:
  using Piece = QuinticPieceT<Scalar>;

  PiecewiseQuinticT(std::vector<Piece> pieces, Scalar dt_piece, Scalar t0 = Scalar(0))
  : pieces_(std::move(pieces)), dt_piece_(dt_piece), t0_(t0)
  {
    if (pieces_.empty()) {
      throw InvalidInputError("piecewise quintic needs at least one piece");
    }
    if (!(dt_piece_ > Scalar(0)) || !std::isfinite(dt_piece_) || !std::isfinite(t0_)) {
      throw InvalidInputError("piecewise quintic needs finite dt_piece > 0 and finite t0");
    }
    for (const auto & p : pieces_) {
      if (!p.coeffs.allFinite()) {
        throw InvalidInputError("piecewise quintic coefficients must be finite");
      }
    }
  }

  int num_pieces() const { return static_cast<int>(pieces_.size()); }
  Scalar dt_piece() const { return dt_piece_; }
  Scalar t0() const { return t0_; }
  Scalar t_end() const { return t0_ + static_cast<Scalar>(pieces_.size()) * dt_piece_; }
  const std::vector<Piece> & pieces() const { return pieces_; }
  const Piece & piece(int n) const { return pieces_.at(static_cast<size_t>(n)); }

  /// Piece index owning global time t and the local time within it.
  std::pair<int, Scalar> locate(Scalar t) const
  {
    const Scalar span = t_end() - t0_;
    const Scalar slack = Scalar(1e-12) * std::max(Scalar(1), std::abs(t_end()));
    if (!std::isfinite(t) || t < t0_ - slack || t > t_end() + slack) {
      throw DomainError(
        "time " + std::to_string(static_cast<double>(t)) + " outside trajectory domain [" +
        std::to_string(static_cast<double>(t0_)) + ", " +
        std::to_string(static_cast<double>(t_end())) + "]");
    }
    const Scalar rel = std::clamp(t - t0_, Scalar(0), span);
    const int last = num_pieces() - 1;
    const int n = std::min(last, static_cast<int>(std::floor(rel / dt_piece_)));
    const Scalar tau = std::clamp(rel - static_cast<Scalar>(n) * dt_piece_, Scalar(0), dt_piece_);
    return {n, tau};
  }

private:
  std::vector<Piece> pieces_;
  Scalar dt_piece_;
  Scalar t0_;
};

using QuinticPiece = QuinticPieceT<double>;
using PiecewiseQuintic = PiecewiseQuinticT<double>;

/// Evaluates the order-th derivative of a single quintic at local time tau.
template <typename Scalar>
Vec2T<Scalar> eval_piece(const QuinticPieceT<Scalar> & piece, Scalar tau, int order)
{
  if (order < 0 || order > 5) {
    throw DomainError("derivative order must be in 0..5");
  }
  // Horner on the differentiated coefficients k!/(k-order)! * f_k.
  Vec2T<Scalar> acc = Vec2T<Scalar>::Zero();
  for (int k = 5; k >= order; --k) {
    Scalar falling = Scalar(1);
    for (int j = 0; j < order; ++j) {
      falling *= static_cast<Scalar>(k - j);
    }
    acc = acc * tau + falling * piece.coeffs.row(k).transpose();
  }
  return acc;
}

template <typename Scalar>
Vec2T<Scalar> eval(const PiecewiseQuinticT<Scalar> & traj, Scalar t, int order = 0)
{
  if (order < 0 || order > 3) {
    throw DomainError("derivative order must be in 0..3");
  }
  const auto [n, tau] = traj.locate(t);
  return eval_piece(traj.piece(n), tau, order);
}

template <typename Scalar>
FlatSignalT<Scalar> to_flat_signal(const PiecewiseQuinticT<Scalar> & traj, Scalar t)
{
  FlatSignalT<Scalar> sig;
  sig.sigma = eval(traj, t, 0);
  sig.d_sigma = eval(traj, t, 1);
  sig.dd_sigma = eval(traj, t, 2);
  return sig;
}

template <typename Scalar>
struct TrajectorySampleT
{
  Scalar t;
  Vec2T<Scalar> position;
  Vec2T<Scalar> velocity;
  Vec2T<Scalar> acceleration;
};

/// Samples from t0 to the end every dt_sample; the last sample sits exactly at the end.
template <typename Scalar>
std::vector<TrajectorySampleT<Scalar>> sample(
  const PiecewiseQuinticT<Scalar> & traj, Scalar dt_sample)
{
  if (!(dt_sample > Scalar(0)) || !std::isfinite(dt_sample)) {
    throw InvalidInputError("sample requires finite dt_sample > 0");
  }
  const Scalar span = traj.t_end() - traj.t0();
  const Scalar ratio = span / dt_sample;
  // Snap ratios that are integral up to rounding.
  const Scalar snapped = std::round(ratio);
  const bool integral = std::abs(ratio - snapped) <= Scalar(1e-9) * std::max(Scalar(1), ratio);
  const long count =
    integral ? static_cast<long>(snapped) : static_cast<long>(std::floor(ratio)) + 1;

  std::vector<TrajectorySampleT<Scalar>> out;
  out.reserve(static_cast<size_t>(count) + 2);
  auto push = [&](Scalar t) {
    out.push_back({t, eval(traj, t, 0), eval(traj, t, 1), eval(traj, t, 2)});
  };
  for (long k = 0; k < count; ++k) {
    push(traj.t0() + static_cast<Scalar>(k) * dt_sample);
  }
  push(traj.t_end());
  return out;
}

}  // namespace minidrive

#endif  // MINIDRIVE_TRAJECTORY_HPP_
