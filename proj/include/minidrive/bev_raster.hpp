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

#ifndef MINIDRIVE_BEV_RASTER_HPP_
#define MINIDRIVE_BEV_RASTER_HPP_

#include "minidrive/common.hpp"
#include "minidrive/flat_vehicle.hpp"
#include "minidrive/geometry.hpp"
#include "minidrive/static_map.hpp"

#include <Eigen/Geometry>

#include <array>
#include <vector>

namespace minidrive
{

inline constexpr int kRasterSize = 224;
inline constexpr int kRasterChannels = 3;

/// Channel layout of a BevRaster.
enum class Channel : int
{
  env = 0,      // lanes, intersections, drivable area
  dynamic = 1,  // other agents
  ego = 2,      // ego footprint
};

/// Fill intensities of the static channel; overlapping features keep the maximum.
inline constexpr float kDrivableIntensity = 0.25F;
inline constexpr float kIntersectionIntensity = 0.5F;
inline constexpr float kLaneIntensity = 1.0F;

struct RasterSpec
{
  int width{kRasterSize};
  int height{kRasterSize};
  double resolution{0.5};  // meters per pixel
  Vec2 ego_anchor{112.0, 168.0};  // (column, row) of the ego rear-axle center
  bool ego_heading_up{true};

  void validate() const;
  bool operator==(const RasterSpec &) const = default;
};

/// Three planes of height x width intensities in [0, 1].
class BevRaster
{
public:
  using Plane = Eigen::ArrayXXf;  // rows x cols = height x width

  explicit BevRaster(const RasterSpec & spec = RasterSpec{});

  const RasterSpec & spec() const { return spec_; }
  Plane & channel(Channel c) { return planes_[static_cast<size_t>(c)]; }
  const Plane & channel(Channel c) const { return planes_[static_cast<size_t>(c)]; }
  Plane & channel(int c) { return planes_.at(static_cast<size_t>(c)); }
  const Plane & channel(int c) const { return planes_.at(static_cast<size_t>(c)); }

  bool operator==(const BevRaster & other) const;

private:
  RasterSpec spec_;
  std::array<Plane, kRasterChannels> planes_;
};

/// World meters to pixel coordinates (x = column, y = row) for one ego pose.
/// Pixel (c, r) spans [c, c + 1) x [r, r + 1); its center is (c + 0.5, r + 0.5).
///
/// The ego pose is subtracted before any scaling so that translating the
/// whole world leaves pixel coordinates unchanged.
class WorldToRaster
{
public:
  WorldToRaster(const VehicleState & ego_pose, const RasterSpec & spec);

  Vec2 to_pixel(const Vec2 & world) const;
  Vec2 to_world(const Vec2 & pixel) const;
  /// Pixel-space heading of a world-frame heading.
  Vec2 direction_to_pixel(const Vec2 & world_direction) const { return linear_ * world_direction; }

  /// Equivalent single affine map (world -> pixel).
  Eigen::Affine2d affine() const;
  double scale() const { return 1.0 / resolution_; }

private:
  Vec2 origin_;
  Eigen::Matrix2d linear_;
  Eigen::Matrix2d inverse_linear_;
  Vec2 anchor_;
  double resolution_;
};

BevRaster rasterize_static(const StaticMap & map, const VehicleState & ego_pose, const RasterSpec & spec);

BevRaster rasterize_dynamic(
  const std::vector<OrientedBox> & agents, const VehicleState & ego_pose, const RasterSpec & spec);

/// Ego footprint box centered on the ego pose.
BevRaster render_ego(const VehicleState & ego_pose, const VehicleParams & params, const RasterSpec & spec);

/// Channelwise saturating sum.
BevRaster compose(const BevRaster & env, const BevRaster & dyn);

OrientedBox ego_footprint(const VehicleState & ego_pose, const VehicleParams & params);

/// Mean of (a - b)^2 over every entry of every channel.
double raster_mse(const BevRaster & a, const BevRaster & b);

}  // namespace minidrive

#endif  // MINIDRIVE_BEV_RASTER_HPP_
