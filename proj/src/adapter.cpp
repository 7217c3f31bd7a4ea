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

#include "tristream/adapter.hpp"

#include <algorithm>
#include <map>

namespace tristream {

Plane to_plane(const FrameBuffer& f) {
  Plane p;
  p.width = f.width;
  p.height = f.height;
  p.channels = f.channels;
  p.values.resize(static_cast<Eigen::Index>(f.data.size()));
  for (std::size_t i = 0; i < f.data.size(); ++i) p.values[static_cast<Eigen::Index>(i)] = f.data[i];
  return p;
}

Plane to_plane(const ResidualMap& r) {
  Plane p;
  p.width = r.width;
  p.height = r.height;
  p.channels = r.channels;
  p.values.resize(static_cast<Eigen::Index>(r.data.size()));
  for (std::size_t i = 0; i < r.data.size(); ++i) p.values[static_cast<Eigen::Index>(i)] = r.data[i];
  return p;
}

Plane to_plane(const MotionField& f) {
  Plane p;
  p.width = f.grid_w;
  p.height = f.grid_h;
  p.channels = 2;
  p.values.resize(static_cast<Eigen::Index>(f.mv.size()) * 2);
  const double inv = 1.0 / f.subpel_scale;
  for (std::size_t i = 0; i < f.mv.size(); ++i) {
    p.values[static_cast<Eigen::Index>(2 * i)] = f.mv[i].first * inv;
    p.values[static_cast<Eigen::Index>(2 * i + 1)] = f.mv[i].second * inv;
  }
  return p;
}

Vec patch_mean(const Plane& map, int patch, int in_channels) {
  if (map.channels != in_channels)
    throw input_error("encode_branch: map has " + std::to_string(map.channels) +
                      " channels, params expect " + std::to_string(in_channels));
  if (patch <= 0 || map.width % patch != 0 || map.height % patch != 0)
    throw input_error("encode_branch: map dimensions not divisible by patch size");

  const int px = map.width / patch;
  const int py = map.height / patch;
  const int flat = patch * patch * in_channels;
  Vec mean = Vec::Zero(flat);
  for (int ty = 0; ty < py; ++ty) {
    for (int tx = 0; tx < px; ++tx) {
      Eigen::Index o = 0;
      for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x)
          for (int c = 0; c < in_channels; ++c)
            mean[o++] += map.at(tx * patch + x, ty * patch + y, c);
    }
  }
  mean /= static_cast<double>(px) * py;
  return mean;
}

Vec encode_branch(const Plane& map, const BranchParams& params) {
  if (params.proj.cols() != params.flat_dim() || params.proj.rows() != params.bias.size())
    throw input_error("encode_branch: projection shape does not match patch geometry");
  return params.proj * patch_mean(map, params.patch, params.in_channels) + params.bias;
}

GateResult fuse_pair(const Vec& a, const Vec& b, const GateParams& gate) {
  const Eigen::Index d = a.size();
  if (b.size() != d) throw input_error("fuse: operand dimensions differ");
  if (gate.w.rows() != d || gate.w.cols() != 2 * d || gate.b.size() != d)
    throw input_error("fuse: gate parameter shape mismatch");

  Vec z = gate.w.leftCols(d) * a + gate.w.rightCols(d) * b + gate.b;
  GateResult r;
  r.gate = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  r.fused = (r.gate.array() * a.array() + (1.0 - r.gate.array()) * b.array()).matrix();
  return r;
}

GateResult fuse_mr(const Vec& h_mv, const Vec& h_res, const GateParams& gate) {
  return fuse_pair(h_mv, h_res, gate);
}

FusedEmbedding fuse_tri(const GateResult& mr, const Vec& h_ifr, const GateParams& gate) {
  const GateResult tri = fuse_pair(mr.fused, h_ifr, gate);
  FusedEmbedding out;
  out.h_fused = tri.fused;
  out.g_mr = mr.gate;
  out.g_tri = tri.gate;
  return out;
}

Vec fuse_variant(FusionMode mode, const Vec& h_mv, const Vec& h_res, const Vec& h_ifr,
                 const FusionVariantParams& params) {
  const Eigen::Index d = h_mv.size();
  if (h_res.size() != d || h_ifr.size() != d)
    throw input_error("fuse_variant: operand dimensions differ");

  switch (mode) {
    case FusionMode::concat: {
      if (params.concat_proj.cols() != 3 * d)
        throw input_error("fuse_variant: concat projection must be d x 3d");
      Vec cat(3 * d);
      cat << h_mv, h_res, h_ifr;
      return params.concat_proj * cat;
    }
    case FusionMode::weighted_sum: {
      const Eigen::Vector3d e = (params.sum_logits.array() - params.sum_logits.maxCoeff()).exp();
      const Eigen::Vector3d w = e / e.sum();
      return w[0] * h_mv + w[1] * h_res + w[2] * h_ifr;
    }
    case FusionMode::concat_mlp: {
      if (params.mlp_w1.cols() != 3 * d || params.mlp_w2.cols() != params.mlp_w1.rows())
        throw input_error("fuse_variant: MLP shapes do not match 3d input");
      Vec cat(3 * d);
      cat << h_mv, h_res, h_ifr;
      const Vec hidden = ((params.mlp_w1 * cat + params.mlp_b1).array().tanh()).matrix();
      return params.mlp_w2 * hidden + params.mlp_b2;
    }
    case FusionMode::gated:
      return fuse_tri(fuse_mr(h_mv, h_res, params.gate_mr), h_ifr, params.gate_tri).h_fused;
  }
  throw input_error("fuse_variant: unknown mode");
}

std::vector<GateReportRow> gate_report(
    const std::vector<std::pair<FusedEmbedding, std::string>>& samples) {
  if (samples.empty()) throw input_error("gate_report: empty input");

  std::vector<GateReportRow> rows;
  std::map<std::string, std::size_t> index;
  for (const auto& [emb, label] : samples) {
    auto [it, inserted] = index.try_emplace(label, rows.size());
    if (inserted) rows.push_back(GateReportRow{label, 0, 0, 0, 0});
    GateReportRow& row = rows[it->second];
    row.w_mv += (emb.g_tri.array() * emb.g_mr.array()).mean();
    row.w_res += (emb.g_tri.array() * (1.0 - emb.g_mr.array())).mean();
    row.w_ifr += (1.0 - emb.g_tri.array()).mean();
    row.n += 1;
  }
  for (auto& row : rows) {
    row.w_mv /= row.n;
    row.w_res /= row.n;
    row.w_ifr /= row.n;
  }
  return rows;
}

}  // namespace tristream
