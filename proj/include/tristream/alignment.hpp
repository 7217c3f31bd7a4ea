// Copyright 2026 The Tristream Authors
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

#pragma once

#include <Eigen/Dense>
#include <functional>

#include "tristream/adapter.hpp"
#include "tristream/frame.hpp"

namespace tristream {

/// Projects fused motion embeddings into the host visual space. The
/// temperature is stored as log tau so updates keep tau positive without
/// clipping.
struct AlignmentHead {
  Mat proj;  // d_v x d
  double log_tau = 0.0;

  double tau() const { return std::exp(log_tau); }
};

/// Paired motion codes and visual-delta targets, row per sample.
struct AlignmentBatch {
  Mat m;  // B x d_v
  Mat v;  // B x d_v
  double lambda_cos = 0.1;

  Eigen::Index size() const { return m.rows(); }
};

struct LossGrads {
  double loss = 0.0;
  Mat d_m;
  Mat d_v;
  double d_log_tau = 0.0;
};

/// Bidirectional InfoNCE over cosine similarities at temperature tau:
/// each motion code must be closer to its own visual delta than to any other
/// row of the batch, in both directions. Needs B >= 2 and no zero-norm rows.
LossGrads infonce_loss(const AlignmentBatch& batch, double tau);

/// InfoNCE plus the cosine regulariser lambda_cos * mean_k(1 - cos(m_k, v_k)).
LossGrads align_loss(const AlignmentBatch& batch, const AlignmentHead& head);

/// Mean squared row difference (1/B) sum ||m_k - v_k||^2.
LossGrads mse_loss(const AlignmentBatch& batch);

/// align_loss + mse_weight * mse_loss.
LossGrads hybrid_loss(const AlignmentBatch& batch, const AlignmentHead& head,
                      double mse_weight = 0.5);

/// Central finite differences against an analytic gradient. `f` evaluates the
/// loss at a parameter vector; `analytic` is the gradient claimed at `x`.
/// Returns the max relative error |a - fd| / max(1, |a|, |fd|) over all
/// coordinates. Throws on a non-finite loss.
double grad_check(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& analytic,
                  double eps);

/// Mean over grid positions of (feat_next - feat_prev). Grids are
/// positions x d_v matrices.
Vec visual_delta(const Mat& feat_next, const Mat& feat_prev);

/// Deterministic stand-in for the frozen host encoder: at each fine patch, the
/// per-channel means of the patch and of its containing 2x-coarser patch, each
/// paired with its first spatial moments (mean * normalized center x/y). The
/// moments make the pooled delta of a moving scene encode where intensity
/// moved, which is the property the alignment target needs. d_v = 6 *
/// channels. Dimensions must divide by 2 * patch.
Mat host_feature_grid(const FrameBuffer& frame, int patch);

}  // namespace tristream
