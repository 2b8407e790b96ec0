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

#ifndef MINIDRIVE_FLAT_VEHICLE_HPP_
#define MINIDRIVE_FLAT_VEHICLE_HPP_

#include "minidrive/common.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace minidrive
{

/// Rear-axle pose and speed of a kinematic bicycle.
template <typename Scalar>
struct VehicleStateT
{
  Scalar px{0};
  Scalar py{0};
  Scalar theta{0};  // wrapped to (-pi, pi]
  Scalar v{0};

  VehicleStateT() = default;
  VehicleStateT(Scalar x, Scalar y, Scalar heading, Scalar speed)
  : px(x), py(y), theta(wrap_angle(heading)), v(speed)
  {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(heading) || !std::isfinite(speed)) {
      throw InvalidInputError("vehicle state must be finite");
    }
    if (speed < Scalar(0)) {
      throw InvalidInputError("vehicle speed must be non-negative");
    }
  }

  Vec2T<Scalar> position() const { return {px, py}; }
  Vec2T<Scalar> heading_vector() const { return {std::cos(theta), std::sin(theta)}; }
  Vec2T<Scalar> velocity() const { return v * heading_vector(); }

  bool operator==(const VehicleStateT &) const = default;
};

template <typename Scalar>
struct VehicleControlT
{
  Scalar a{0};
  Scalar phi{0};

  VehicleControlT() = default;
  VehicleControlT(Scalar accel, Scalar steer) : a(accel), phi(steer)
  {
    if (!std::isfinite(accel) || !std::isfinite(steer)) {
      throw InvalidInputError("vehicle control must be finite");
    }
    if (std::abs(steer) >= std::numbers::pi_v<Scalar> / Scalar(2)) {
      throw InvalidInputError("steering angle must satisfy |phi| < pi/2");
    }
  }
};

struct VehicleParams
{
  double wheelbase{2.7};
  double v_max{20.0};
  double a_max{4.0};
  double length{4.5};
  double width{1.9};

  void validate() const
  {
    const double fields[] = {wheelbase, v_max, a_max, length, width};
    for (const double f : fields) {
      if (!(std::isfinite(f) && f > 0.0)) {
        throw InvalidInputError("vehicle parameters must be finite and strictly positive");
      }
    }
  }
};

/// Flat output (rear-axle position) with its first two time derivatives.
template <typename Scalar>
struct FlatSignalT
{
  Vec2T<Scalar> sigma{Vec2T<Scalar>::Zero()};
  Vec2T<Scalar> d_sigma{Vec2T<Scalar>::Zero()};
  Vec2T<Scalar> dd_sigma{Vec2T<Scalar>::Zero()};
};

using VehicleState = VehicleStateT<double>;
using VehicleControl = VehicleControlT<double>;
using FlatSignal = FlatSignalT<double>;

/// Speed below which heading, acceleration and steering are not recoverable from a flat signal.
inline constexpr double kLowSpeedEps = 1e-3;

/// Raised by flat_to_state when the flat velocity vanishes. Carries the still
/// well-defined part of the state.
class LowSpeedError : public Error
{
public:
  LowSpeedError(double px, double py, double v)
  : Error("E_LOW_SPEED", "flat signal speed below threshold; heading undefined"),
    px_(px),
    py_(py),
    v_(v)
  {
  }
  double px() const noexcept { return px_; }
  double py() const noexcept { return py_; }
  double v() const noexcept { return v_; }

private:
  double px_;
  double py_;
  double v_;
};

namespace detail
{

template <typename Scalar>
using StateVec = Eigen::Matrix<Scalar, 4, 1>;

template <typename Scalar>
StateVec<Scalar> bicycle_rhs(
  const StateVec<Scalar> & x, const VehicleControlT<Scalar> & u, Scalar wheelbase)
{
  StateVec<Scalar> dx;
  dx << x(3) * std::cos(x(2)), x(3) * std::sin(x(2)), x(3) / wheelbase * std::tan(u.phi), u.a;
  return dx;
}

}  // namespace detail

/// Advances the kinematic bicycle by dt under a time-varying control
/// `control_at(t)`, using classical RK4 on substeps no longer than max_substep.
/// Speed is clamped at zero after each substep (forward driving only).
template <typename Scalar, typename ControlFn>
VehicleStateT<Scalar> step_dynamics(
  const VehicleStateT<Scalar> & state, ControlFn && control_at, const VehicleParams & params,
  Scalar t0, Scalar dt, Scalar max_substep = Scalar(0.01))
{
  if (!(dt > Scalar(0)) || !std::isfinite(dt) || !std::isfinite(t0)) {
    throw InvalidInputError("step_dynamics requires finite dt > 0");
  }
  params.validate();
  const Scalar wheelbase = static_cast<Scalar>(params.wheelbase);
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / max_substep - Scalar(1e-9))));
  const Scalar h = dt / static_cast<Scalar>(substeps);

  detail::StateVec<Scalar> x(state.px, state.py, state.theta, state.v);
  for (int i = 0; i < substeps; ++i) {
    const Scalar t = t0 + static_cast<Scalar>(i) * h;
    const VehicleControlT<Scalar> u0 = control_at(t);
    const VehicleControlT<Scalar> um = control_at(t + h / Scalar(2));
    const VehicleControlT<Scalar> u1 = control_at(t + h);
    const auto k1 = detail::bicycle_rhs<Scalar>(x, u0, wheelbase);
    const auto k2 = detail::bicycle_rhs<Scalar>(x + h / Scalar(2) * k1, um, wheelbase);
    const auto k3 = detail::bicycle_rhs<Scalar>(x + h / Scalar(2) * k2, um, wheelbase);
    const auto k4 = detail::bicycle_rhs<Scalar>(x + h * k3, u1, wheelbase);
    x += h / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    x(3) = std::max(x(3), Scalar(0));
  }
  if (!x.allFinite()) {
    throw InvalidInputError("step_dynamics produced a non-finite state");
  }
  return VehicleStateT<Scalar>(x(0), x(1), x(2), x(3));
}

/// Constant-control overload.
template <typename Scalar>
VehicleStateT<Scalar> step_dynamics(
  const VehicleStateT<Scalar> & state, const VehicleControlT<Scalar> & ctrl,
  const VehicleParams & params, Scalar dt, Scalar max_substep = Scalar(0.01))
{
  return step_dynamics<Scalar>(
    state, [&ctrl](Scalar) { return ctrl; }, params, Scalar(0), dt, max_substep);
}

namespace detail
{

template <typename Scalar>
void check_flat_finite(const FlatSignalT<Scalar> & sig)
{
  if (!sig.sigma.allFinite() || !sig.d_sigma.allFinite() || !sig.dd_sigma.allFinite()) {
    throw InvalidInputError("flat signal must be finite");
  }
}

template <typename Scalar>
std::pair<VehicleStateT<Scalar>, VehicleControlT<Scalar>> regular_flat_to_state(
  const FlatSignalT<Scalar> & sig, const VehicleParams & params)
{
  const Vec2T<Scalar> & d = sig.d_sigma;
  const Vec2T<Scalar> & dd = sig.dd_sigma;
  const Scalar speed_sq = d.squaredNorm();
  const Scalar speed = std::sqrt(speed_sq);
  const Scalar theta = std::atan2(d.y(), d.x());
  const Scalar accel = d.dot(dd) / speed;
  const Scalar cross = d.x() * dd.y() - d.y() * dd.x();
  // atan saturates to exactly pi/2 in floating point for extreme curvature.
  const Scalar phi_limit = std::numbers::pi_v<Scalar> / Scalar(2) - Scalar(1e-9);
  const Scalar phi = std::clamp(
    std::atan(cross * static_cast<Scalar>(params.wheelbase) / (speed_sq * speed)), -phi_limit,
    phi_limit);
  return {
    VehicleStateT<Scalar>(sig.sigma.x(), sig.sigma.y(), theta, speed),
    VehicleControlT<Scalar>(accel, phi)};
}

}  // namespace detail

/// Recovers state and control from a flat signal. Throws LowSpeedError when
/// the flat speed is below kLowSpeedEps.
template <typename Scalar>
std::pair<VehicleStateT<Scalar>, VehicleControlT<Scalar>> flat_to_state(
  const FlatSignalT<Scalar> & sig, const VehicleParams & params)
{
  detail::check_flat_finite(sig);
  const Scalar speed = sig.d_sigma.norm();
  if (speed < Scalar(kLowSpeedEps)) {
    throw LowSpeedError(
      static_cast<double>(sig.sigma.x()), static_cast<double>(sig.sigma.y()),
      static_cast<double>(speed));
  }
  return detail::regular_flat_to_state(sig, params);
}

/// Same as flat_to_state, but below kLowSpeedEps the heading is held at
/// previous_heading, steering is zero, and acceleration is the flat
/// acceleration projected on the held heading.
template <typename Scalar>
std::pair<VehicleStateT<Scalar>, VehicleControlT<Scalar>> flat_to_state_held(
  const FlatSignalT<Scalar> & sig, const VehicleParams & params, Scalar previous_heading = 0)
{
  detail::check_flat_finite(sig);
  const Scalar speed = sig.d_sigma.norm();
  if (speed >= Scalar(kLowSpeedEps)) {
    return detail::regular_flat_to_state(sig, params);
  }
  const Vec2T<Scalar> h(std::cos(previous_heading), std::sin(previous_heading));
  return {
    VehicleStateT<Scalar>(sig.sigma.x(), sig.sigma.y(), previous_heading, speed),
    VehicleControlT<Scalar>(sig.dd_sigma.dot(h), Scalar(0))};
}

}  // namespace minidrive

#endif  // MINIDRIVE_FLAT_VEHICLE_HPP_
