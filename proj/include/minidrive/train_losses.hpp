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

#ifndef MINIDRIVE_TRAIN_LOSSES_HPP_
#define MINIDRIVE_TRAIN_LOSSES_HPP_

#include "minidrive/bev_raster.hpp"
#include "minidrive/common.hpp"

namespace minidrive
{

struct LossWeights
{
  double alpha_deg{60.0};

  void validate() const;
  double decision_weight() const;  // sin(alpha)
  double prediction_weight() const;  // cos(alpha)
};

/// Mean squared error over every entry; shapes must match.
double decision_loss(const Eigen::MatrixXd & p_de, const Eigen::MatrixXd & p_gt);

/// 100 * MSE(compose(env_gt, bev_pr), bev_gt).
double prediction_loss(const BevRaster & env_gt, const BevRaster & bev_pr, const BevRaster & bev_gt);

/// sin(alpha) * ld + cos(alpha) * lp.
double combined_loss(double ld, double lp, const LossWeights & w = {});

/// MSE(compose(env_er, bev_pr), bev_sm), without the factor of 100.
double finetune_loss(const BevRaster & env_er, const BevRaster & bev_pr, const BevRaster & bev_sm);

}  // namespace minidrive

#endif  // MINIDRIVE_TRAIN_LOSSES_HPP_
