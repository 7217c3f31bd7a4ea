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

// Test-only oracle: a naive exhaustive block matcher written independently of
// the library's estimator. It enumerates every candidate displacement on the
// requested sub-pel grid in one flat pass, so the precision ladder and
// incremental refinement of the real implementation are checked against a
// direct search over the same contract (clamped reads, rounded bilinear
// samples, SAD -> |v|_1 -> scan-order tie ladder).

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "tristream/frame.hpp"
#include "tristream/motion.hpp"

namespace oracle {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double pixel(const tristream::FrameBuffer& f, double x, double y, int c) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto read = [&](int xx, int yy) {
    return static_cast<double>(f.at(clampi(xx, 0, f.width - 1), clampi(yy, 0, f.height - 1), c));
  };
  if (fx == 0.0 && fy == 0.0) return read(x0, y0);
  const double v = (1 - fy) * ((1 - fx) * read(x0, y0) + fx * read(x0 + 1, y0)) +
                   fy * ((1 - fx) * read(x0, y0 + 1) + fx * read(x0 + 1, y0 + 1));
  return static_cast<double>(std::clamp(std::lround(v), 0L, 255L));
}

inline std::uint64_t sad(const tristream::FrameBuffer& prev, const tristream::FrameBuffer& cur,
                         int bx0, int by0, int block, double dx, double dy) {
  std::uint64_t sum = 0;
  for (int y = by0; y < by0 + block; ++y)
    for (int x = bx0; x < bx0 + block; ++x)
      for (int c = 0; c < cur.channels; ++c)
        sum += static_cast<std::uint64_t>(
            std::abs(static_cast<double>(cur.at(x, y, c)) - pixel(prev, x - dx, y - dy, c)));
  return sum;
}

// Best displacement for one block over the full sub-pel candidate grid.
inline std::pair<double, double> best_block_mv(const tristream::FrameBuffer& prev,
                                               const tristream::FrameBuffer& cur, int bx0, int by0,
                                               int block, int range, int subpel_scale) {
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  double best_dx = 0, best_dy = 0;
  const int steps = range * subpel_scale;
  for (int iy = -steps; iy <= steps; ++iy) {
    for (int ix = -steps; ix <= steps; ++ix) {
      const double dx = static_cast<double>(ix) / subpel_scale;
      const double dy = static_cast<double>(iy) / subpel_scale;
      const std::uint64_t s = sad(prev, cur, bx0, by0, block, dx, dy);
      const double l1 = std::abs(dx) + std::abs(dy);
      const double best_l1 = std::abs(best_dx) + std::abs(best_dy);
      if (s < best || (s == best && l1 < best_l1)) {
        best = s;
        best_dx = dx;
        best_dy = dy;
      }
    }
  }
  return {best_dx, best_dy};
}

// Full oracle field at integer precision (subpel_scale 1): the reference for
// the exhaustive-search equivalence criterion.
inline tristream::MotionField full_field(const tristream::FrameBuffer& prev,
                                         const tristream::FrameBuffer& cur, int block, int range) {
  tristream::MotionField field(cur.width / block, cur.height / block, block, 1);
  for (int by = 0; by < field.grid_h; ++by)
    for (int bx = 0; bx < field.grid_w; ++bx) {
      const auto [dx, dy] = best_block_mv(prev, cur, bx * block, by * block, block, range, 1);
      field.at(bx, by) = {static_cast<std::int16_t>(std::lround(dx)),
                          static_cast<std::int16_t>(std::lround(dy))};
    }
  return field;
}

}  // namespace oracle
