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

#include <cstdint>
#include <vector>

#include "tristream/frame.hpp"

namespace tristream {

/// Per-block displacement grid. Vectors are stored in sub-pel units
/// (subpel_scale 1 = full pel, 2 = half pel, 4 = quarter pel) and point from
/// the reference frame toward the current frame, i.e. they are per-block
/// velocities: warp() reconstructs the current frame by reading the reference
/// at p - mv/subpel_scale.
struct MotionField {
  int grid_w = 0;
  int grid_h = 0;
  int block_size = 16;
  int subpel_scale = 1;  // 1, 2, or 4
  std::vector<std::pair<std::int16_t, std::int16_t>> mv;  // row-major, grid_w*grid_h entries

  MotionField() = default;
  MotionField(int gw, int gh, int bs, int scale)
      : grid_w(gw), grid_h(gh), block_size(bs), subpel_scale(scale),
        mv(static_cast<std::size_t>(gw) * gh, {0, 0}) {}

  std::pair<std::int16_t, std::int16_t>& at(int bx, int by) { return mv[static_cast<std::size_t>(by) * grid_w + bx]; }
  std::pair<std::int16_t, std::int16_t> at(int bx, int by) const { return mv[static_cast<std::size_t>(by) * grid_w + bx]; }

  bool matches_frame(const FrameBuffer& f) const {
    return grid_w * block_size == f.width && grid_h * block_size == f.height;
  }
};

/// Signed difference-domain map; values in [-255, 255].
struct ResidualMap {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::int16_t> data;

  ResidualMap() = default;
  ResidualMap(int w, int h, int c)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

  std::int16_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::int16_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

/// Full-search block matching under SAD. Integer displacements in
/// [-search_range, +search_range]^2 are scanned exhaustively; ties break by
/// smallest SAD, then smallest |v|_1, then row-major candidate order. Sub-pel
/// refinement steps the winning vector by one half-pel (and then one
/// quarter-pel for subpel_scale 4) in each direction, using bilinear samples
/// rounded to the nearest 8-bit value — the same prediction warp() produces,
/// so block SAD equals the warped residual's absolute sum. Reads outside the
/// reference clamp to the frame edge.
MotionField estimate_motion(const FrameBuffer& prev, const FrameBuffer& cur, int block_size,
                            int search_range, int subpel_scale);

/// Motion-compensated prediction of the "current" frame from `prev`:
/// each block copies the sub-pel-interpolated source block displaced by its
/// vector, with edge clamping.
FrameBuffer warp(const FrameBuffer& prev, const MotionField& field);

/// Elementwise cur - warped in the signed domain.
ResidualMap compute_residual(const FrameBuffer& cur, const FrameBuffer& warped);

/// Bilinear reference sample at sub-pel position, clamped to the frame and
/// rounded to the nearest integer. Shared by estimate_motion and warp.
std::uint8_t sample_subpel(const FrameBuffer& f, double x, double y, int c);

}  // namespace tristream
