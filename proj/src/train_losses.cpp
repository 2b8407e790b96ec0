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

#include "minidrive/train_losses.hpp"

#include <cmath>
#include <numbers>

namespace minidrive
{

namespace
{

double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

void check_specs(const BevRaster & a, const BevRaster & b, const BevRaster & c)
{
  if (!(a.spec() == b.spec()) || !(a.spec() == c.spec())) {
    throw InvalidInputError("raster losses need rasters with matching specs");
  }
}

}  // namespace

void LossWeights::validate() const
{
  if (!(alpha_deg >= 0.0 && alpha_deg <= 90.0)) {
    throw InvalidInputError("loss weight alpha must lie in [0, 90] degrees");
  }
}

double LossWeights::decision_weight() const { return std::sin(to_radians(alpha_deg)); }

double LossWeights::prediction_weight() const { return std::cos(to_radians(alpha_deg)); }

double decision_loss(const Eigen::MatrixXd & p_de, const Eigen::MatrixXd & p_gt)
{
  if (p_de.rows() != p_gt.rows() || p_de.cols() != p_gt.cols() || p_de.size() == 0) {
    throw InvalidInputError("decision loss needs non-empty matrices of equal shape");
  }
  return (p_de - p_gt).squaredNorm() / static_cast<double>(p_de.size());
}

double prediction_loss(const BevRaster & env_gt, const BevRaster & bev_pr, const BevRaster & bev_gt)
{
  check_specs(env_gt, bev_pr, bev_gt);
  return 100.0 * raster_mse(compose(env_gt, bev_pr), bev_gt);
}

double combined_loss(double ld, double lp, const LossWeights & w)
{
  w.validate();
  if (!(ld >= 0.0) || !(lp >= 0.0)) {
    throw InvalidInputError("combined loss terms must be non-negative");
  }
  return w.decision_weight() * ld + w.prediction_weight() * lp;
}

double finetune_loss(const BevRaster & env_er, const BevRaster & bev_pr, const BevRaster & bev_sm)
{
  check_specs(env_er, bev_pr, bev_sm);
  return raster_mse(compose(env_er, bev_pr), bev_sm);
}

}  // namespace minidrive
