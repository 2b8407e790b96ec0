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

#ifndef MINIDRIVE_POLICY_HPP_
#define MINIDRIVE_POLICY_HPP_

#include "minidrive/bev_raster.hpp"
#include "minidrive/common.hpp"
#include "minidrive/flat_vehicle.hpp"
#include "minidrive/scenario.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace minidrive
{

/// Maximum number of past frames handed to a policy.
inline constexpr int kContextLength = 60;
inline constexpr int kProtocolSchemaVersion = 1;

struct ObservationFrame
{
  int frame{0};
  VehicleState ego;
  /// Composed raster; null when the simulation does not render observations.
  std::shared_ptr<const BevRaster> raster;
};

struct Observation
{
  std::vector<ObservationFrame> history;  // oldest first, 1..kContextLength entries
  VehicleState ego;
  int frame{0};  // scenario frame of the decision instant

  void validate() const;
};

/// Future ego positions at 0.1 s steps, in the ego frame at the decision instant.
struct Decision
{
  Waypoints waypoints{Waypoints::Zero()};

  void validate() const;
};

class Policy
{
public:
  virtual ~Policy() = default;
  virtual Decision decide(const Observation & obs) = 0;
  /// Whether observations must carry rendered rasters.
  virtual bool needs_rasters() const { return false; }
  virtual std::string name() const = 0;
};

/// Oracle decision: the logged future in the current ego frame.
Decision replay_policy(const Observation & obs, const Scenario & scenario, int frame);

/// Straight-ahead decision at the current speed.
Decision constant_velocity_policy(const Observation & obs);

class ReplayPolicy : public Policy
{
public:
  explicit ReplayPolicy(const Scenario & scenario) : scenario_(scenario) {}
  Decision decide(const Observation & obs) override
  {
    return replay_policy(obs, scenario_, obs.frame);
  }
  std::string name() const override { return "replay"; }

private:
  const Scenario & scenario_;
};

class ConstantVelocityPolicy : public Policy
{
public:
  Decision decide(const Observation & obs) override { return constant_velocity_policy(obs); }
  std::string name() const override { return "cv"; }
};

/// Adds seeded Gaussian noise of standard deviation `sigma` meters to another policy.
class NoisyPolicy : public Policy
{
public:
  NoisyPolicy(std::unique_ptr<Policy> inner, double sigma, std::uint64_t seed);
  Decision decide(const Observation & obs) override;
  bool needs_rasters() const override { return inner_->needs_rasters(); }
  std::string name() const override { return inner_->name() + "+noise"; }

private:
  std::unique_ptr<Policy> inner_;
  double sigma_;
  std::mt19937_64 gen_;
};

/// How observation rasters are sent to an external policy.
enum class RasterTransport
{
  reference,    // {"raster_ref": "frame:<n>"}
  inline_last,  // newest frame inline as base64 tensor, older ones by reference
};

struct ExternalPolicyOptions
{
  std::chrono::milliseconds timeout{5000};
  RasterTransport rasters{RasterTransport::reference};
};

/// Policy served by a subprocess over newline-delimited JSON on its
/// standard streams. The session opens with a hello handshake; each decide
/// request must be answered by exactly one decision line.
class ExternalPolicy : public Policy
{
public:
  explicit ExternalPolicy(const std::string & command, ExternalPolicyOptions options = {});
  ~ExternalPolicy() override;
  ExternalPolicy(const ExternalPolicy &) = delete;
  ExternalPolicy & operator=(const ExternalPolicy &) = delete;

  Decision decide(const Observation & obs) override;
  bool needs_rasters() const override { return options_.rasters == RasterTransport::inline_last; }
  std::string name() const override { return "external"; }

private:
  std::string exchange(const std::string & request_line);
  void shutdown();

  ExternalPolicyOptions options_;
  int pid_{-1};
  int to_child_{-1};
  int from_child_{-1};
  std::string buffer_;
  std::uint64_t next_id_{1};
  bool broken_{false};
};

/// Sends one observation to an external endpoint and validates the reply.
inline Decision external_policy(const Observation & obs, ExternalPolicy & endpoint)
{
  return endpoint.decide(obs);
}

/// Policy protocol message builders, shared with test doubles.
std::string make_hello_request();
std::string make_decide_request(
  const Observation & obs, std::uint64_t id, RasterTransport rasters);
/// Parses a decision response line; throws PolicyError on any violation.
Decision parse_decision_response(const std::string & line, std::uint64_t expected_id);

}  // namespace minidrive

#endif  // MINIDRIVE_POLICY_HPP_
