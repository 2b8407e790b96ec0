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

#ifndef MINIDRIVE_COMMON_HPP_
#define MINIDRIVE_COMMON_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace minidrive
{

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
using Vec2 = Vec2T<double>;

/// Number of future waypoints in a decision (4 s at 0.1 s).
inline constexpr int kDecisionSteps = 40;
/// Scenario clock period in seconds.
inline constexpr double kFrameDt = 0.1;

using Waypoints = Eigen::Matrix<double, kDecisionSteps, 2>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  Error(std::string code, const std::string & what)
  : std::runtime_error(what), code_(std::move(code))
  {
  }
  /// Short machine-parsable code, e.g. "E_INVALID_INPUT".
  const std::string & code() const noexcept { return code_; }

private:
  std::string code_;
};

class InvalidInputError : public Error
{
public:
  explicit InvalidInputError(const std::string & what) : Error("E_INVALID_INPUT", what) {}
};

class DomainError : public Error
{
public:
  explicit DomainError(const std::string & what) : Error("E_DOMAIN", what) {}
};

class SolverError : public Error
{
public:
  explicit SolverError(const std::string & what) : Error("E_SOLVER", what) {}
};

class ParseError : public Error
{
public:
  ParseError(std::string file, int line, std::string field, const std::string & what)
  : Error(
      "E_PARSE", file + ":" + std::to_string(line) + ": field '" + field + "': " + what),
    file_(std::move(file)),
    line_(line),
    field_(std::move(field))
  {
  }
  const std::string & file() const noexcept { return file_; }
  int line() const noexcept { return line_; }
  const std::string & field() const noexcept { return field_; }

private:
  std::string file_;
  int line_;
  std::string field_;
};

class HorizonError : public Error
{
public:
  explicit HorizonError(const std::string & what) : Error("E_HORIZON", what) {}
};

class PolicyError : public Error
{
public:
  explicit PolicyError(const std::string & what) : Error("E_POLICY", what) {}
};

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle)
{
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar a = std::remainder(angle, Scalar(2) * pi);
  if (a <= -pi) {
    a += Scalar(2) * pi;
  }
  return a;
}

}  // namespace minidrive

#endif  // MINIDRIVE_COMMON_HPP_
