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
#include <string>
#include <vector>

#include "tristream/extract.hpp"

namespace tristream {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Real-valued view of a codec map, row-major and channel-interleaved like
/// the byte buffers it mirrors. Motion fields convert to pixel units
/// (sub-pel value / subpel_scale) so embeddings are comparable across
/// precision profiles.
struct Plane {
  int width = 0;
  int height = 0;
  int channels = 1;
  Vec values;  // width*height*channels, interleaved

  double at(int x, int y, int c) const {
    return values[(static_cast<Eigen::Index>(y) * width + x) * channels + c];
  }
};

Plane to_plane(const FrameBuffer& f);
Plane to_plane(const ResidualMap& r);
Plane to_plane(const MotionField& f);

/// Patchify-linear-mean-pool branch encoder: the map splits into
/// non-overlapping patch x patch tiles, each tile flattens to
/// patch^2*in_channels values in storage order, and the branch output is
/// proj * mean(tiles) + bias — linear in the input by construction.
struct BranchParams {
  int patch = 16;
  int in_channels = 1;
  Mat proj;  // d x (patch^2 * in_channels)
  Vec bias;  // d

  int flat_dim() const { return patch * patch * in_channels; }
  int out_dim() const { return static_cast<int>(bias.size()); }
};

/// Mean of the flattened patches; encode_branch is proj * this + bias.
Vec patch_mean(const Plane& map, int patch, int in_channels);

Vec encode_branch(const Plane& map, const BranchParams& params);

struct GateParams {
  Mat w;  // d x 2d
  Vec b;  // d
};

/// Sigmoid-gated convex combination: g = sigma(W[a;b] + bias),
/// fused = g .* a + (1-g) .* b. Both fusion stages reuse this rule with
/// their own parameters.
struct GateResult {
  Vec fused;
  Vec gate;  // componentwise in (0,1)
};

GateResult fuse_pair(const Vec& a, const Vec& b, const GateParams& gate);

struct FusedEmbedding {
  Vec h_fused;
  Vec g_mr;   // MV-vs-residual gate
  Vec g_tri;  // motion-vs-I-frame gate
};

/// Stage 1 of the fusion: MV against residual.
GateResult fuse_mr(const Vec& h_mv, const Vec& h_res, const GateParams& gate);

/// Stage 2: the motion-rich code against I-frame context, carrying the
/// stage-1 gate through for reporting.
FusedEmbedding fuse_tri(const GateResult& mr, const Vec& h_ifr, const GateParams& gate);

enum class FusionMode { concat, weighted_sum, concat_mlp, gated };

/// Parameters for the ablation fusion modes; only the fields for the chosen
/// mode need to be populated.
struct FusionVariantParams {
  Mat concat_proj;        // d x 3d
  Eigen::Vector3d sum_logits = Eigen::Vector3d::Zero();
  Mat mlp_w1;             // h x 3d
  Vec mlp_b1;             // h
  Mat mlp_w2;             // d x h
  Vec mlp_b2;             // d
  GateParams gate_mr;
  GateParams gate_tri;
};

Vec fuse_variant(FusionMode mode, const Vec& h_mv, const Vec& h_res, const Vec& h_ifr,
                 const FusionVariantParams& params);

/// Effective tri-stream weights induced by the two sigmoid stages:
/// w_mv = mean(g_tri .* g_mr), w_res = mean(g_tri .* (1-g_mr)),
/// w_ifr = mean(1-g_tri); the triple sums to 1 per sample.
struct GateReportRow {
  std::string label;
  double w_mv = 0;
  double w_res = 0;
  double w_ifr = 0;
  int n = 0;
};

std::vector<GateReportRow> gate_report(
    const std::vector<std::pair<FusedEmbedding, std::string>>& samples);

}  // namespace tristream
