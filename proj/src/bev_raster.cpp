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

#include "minidrive/bev_raster.hpp"

#include <algorithm>
#include <cmath>

namespace minidrive
{

void RasterSpec::validate() const
{
  if (width != kRasterSize || height != kRasterSize) {
    throw InvalidInputError("raster must be 224 x 224");
  }
  if (!(std::isfinite(resolution) && resolution > 0.0)) {
    throw InvalidInputError("raster resolution must be finite and positive");
  }
  if (!ego_anchor.allFinite()) {
    throw InvalidInputError("raster ego anchor must be finite");
  }
}

BevRaster::BevRaster(const RasterSpec & spec) : spec_(spec)
{
  spec_.validate();
  for (auto & plane : planes_) {
    plane = Plane::Zero(spec_.height, spec_.width);
  }
}

bool BevRaster::operator==(const BevRaster & other) const
{
  if (!(spec_ == other.spec_)) {
    return false;
  }
  for (size_t c = 0; c < planes_.size(); ++c) {
    if (!(planes_[c] == other.planes_[c]).all()) {
      return false;
    }
  }
  return true;
}

WorldToRaster::WorldToRaster(const VehicleState & ego_pose, const RasterSpec & spec)
: origin_(ego_pose.position()), anchor_(spec.ego_anchor), resolution_(spec.resolution)
{
  spec.validate();
  const double s = 1.0 / spec.resolution;
  if (spec.ego_heading_up) {
    // Ego x (forward) points up the image (-row), ego y (left) points left (-column).
    Eigen::Matrix2d flip;
    flip << 0.0, -s, -s, 0.0;
    const Eigen::Matrix2d to_ego = Eigen::Rotation2Dd(-ego_pose.theta).toRotationMatrix();
    linear_ = flip * to_ego;
  } else {
    linear_ << s, 0.0, 0.0, -s;
  }
  inverse_linear_ = linear_.inverse();
}

Vec2 WorldToRaster::to_pixel(const Vec2 & world) const { return anchor_ + linear_ * (world - origin_); }

Vec2 WorldToRaster::to_world(const Vec2 & pixel) const
{
  return origin_ + inverse_linear_ * (pixel - anchor_);
}

Eigen::Affine2d WorldToRaster::affine() const
{
  Eigen::Affine2d a = Eigen::Affine2d::Identity();
  a.linear() = linear_;
  a.translation() = anchor_ - linear_ * origin_;
  return a;
}

namespace
{

/// Pixel (col, row) covers [col, col + 1) x [row, row + 1) and is sampled at its center.
Vec2 pixel_center(int col, int row) { return {col + 0.5, row + 0.5}; }

struct PixelRange
{
  int col0, col1, row0, row1;
  bool empty() const { return col0 > col1 || row0 > row1; }
};

template <typename Points>
PixelRange pixel_range(const Points & pts, double pad, const RasterSpec & spec)
{
  double min_x = INFINITY, max_x = -INFINITY, min_y = INFINITY, max_y = -INFINITY;
  for (const Vec2 & p : pts) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  // Indices whose pixel centers (index + 0.5) fall inside [v_min, v_max].
  const auto lo = [](double v, int limit) {
    return static_cast<int>(std::clamp(std::ceil(v - 0.5), 0.0, static_cast<double>(limit)));
  };
  const auto hi = [](double v, int limit) {
    return static_cast<int>(std::clamp(std::floor(v - 0.5), -1.0, static_cast<double>(limit - 1)));
  };
  return {
    lo(min_x - pad, spec.width), hi(max_x + pad, spec.width), lo(min_y - pad, spec.height),
    hi(max_y + pad, spec.height)};
}

void fill_polygon(BevRaster::Plane & plane, const Polygon & px_poly, float value, const RasterSpec & spec)
{
  if (px_poly.size() < 3) {
    return;
  }
  const PixelRange r = pixel_range(px_poly, 0.0, spec);
  if (r.empty()) {
    return;
  }
  for (int row = r.row0; row <= r.row1; ++row) {
    for (int col = r.col0; col <= r.col1; ++col) {
      if (point_in_polygon(pixel_center(col, row), px_poly)) {
        plane(row, col) = std::max(plane(row, col), value);
      }
    }
  }
}

void draw_segment(BevRaster::Plane & plane, const Vec2 & a, const Vec2 & b, float value, const RasterSpec & spec)
{
  constexpr double kHalfWidthPx = 0.5;
  const std::array<Vec2, 2> ends{a, b};
  const PixelRange r = pixel_range(ends, kHalfWidthPx, spec);
  if (r.empty()) {
    return;
  }
  for (int row = r.row0; row <= r.row1; ++row) {
    for (int col = r.col0; col <= r.col1; ++col) {
      if (point_segment_distance(pixel_center(col, row), a, b) <= kHalfWidthPx) {
        plane(row, col) = std::max(plane(row, col), value);
      }
    }
  }
}

Polygon to_pixels(const std::vector<Vec2> & pts, const WorldToRaster & tf)
{
  Polygon out;
  out.reserve(pts.size());
  for (const Vec2 & p : pts) {
    out.push_back(tf.to_pixel(p));
  }
  return out;
}

void fill_box(BevRaster::Plane & plane, const OrientedBox & box, const WorldToRaster & tf, const RasterSpec & spec)
{
  const auto corners = box.corners();
  const Polygon px = to_pixels({corners.begin(), corners.end()}, tf);
  fill_polygon(plane, px, 1.0F, spec);
}

}  // namespace

BevRaster rasterize_static(const StaticMap & map, const VehicleState & ego_pose, const RasterSpec & spec)
{
  BevRaster out(spec);
  const WorldToRaster tf(ego_pose, spec);
  auto & plane = out.channel(Channel::env);
  for (const Polygon & area : map.drivable_areas) {
    fill_polygon(plane, to_pixels(area, tf), kDrivableIntensity, spec);
  }
  for (const Polygon & area : map.intersections) {
    fill_polygon(plane, to_pixels(area, tf), kIntersectionIntensity, spec);
  }
  for (const Polyline & lane : map.lanes) {
    const Polyline px = to_pixels(lane, tf);
    for (size_t i = 0; i + 1 < px.size(); ++i) {
      draw_segment(plane, px[i], px[i + 1], kLaneIntensity, spec);
    }
  }
  return out;
}

BevRaster rasterize_dynamic(
  const std::vector<OrientedBox> & agents, const VehicleState & ego_pose, const RasterSpec & spec)
{
  BevRaster out(spec);
  const WorldToRaster tf(ego_pose, spec);
  for (const OrientedBox & box : agents) {
    fill_box(out.channel(Channel::dynamic), box, tf, spec);
  }
  return out;
}

OrientedBox ego_footprint(const VehicleState & ego_pose, const VehicleParams & params)
{
  return {ego_pose.position(), ego_pose.theta, params.length, params.width};
}

BevRaster render_ego(const VehicleState & ego_pose, const VehicleParams & params, const RasterSpec & spec)
{
  params.validate();
  BevRaster out(spec);
  const WorldToRaster tf(ego_pose, spec);
  fill_box(out.channel(Channel::ego), ego_footprint(ego_pose, params), tf, spec);
  return out;
}

BevRaster compose(const BevRaster & env, const BevRaster & dyn)
{
  if (!(env.spec() == dyn.spec())) {
    throw InvalidInputError("cannot compose rasters with different specs");
  }
  BevRaster out(env.spec());
  for (int c = 0; c < kRasterChannels; ++c) {
    out.channel(c) = (env.channel(c) + dyn.channel(c)).min(1.0F).max(0.0F);
  }
  return out;
}

double raster_mse(const BevRaster & a, const BevRaster & b)
{
  if (!(a.spec() == b.spec())) {
    throw InvalidInputError("cannot compare rasters with different specs");
  }
  double sum = 0.0;
  for (int c = 0; c < kRasterChannels; ++c) {
    sum += (a.channel(c).cast<double>() - b.channel(c).cast<double>()).square().sum();
  }
  const double count =
    static_cast<double>(kRasterChannels) * a.spec().width * a.spec().height;
  return sum / count;
}

}  // namespace minidrive
