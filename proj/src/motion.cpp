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

#include "tristream/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace tristream {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

std::uint8_t sample_int(const FrameBuffer& f, int x, int y, int c) {
  return f.at(clampi(x, 0, f.width - 1), clampi(y, 0, f.height - 1), c);
}

// SAD of one block of `cur` against the reference displaced by (dx, dy) in
// whole pixels. Reference reads clamp at the edge.
std::uint64_t block_sad_int(const FrameBuffer& prev, const FrameBuffer& cur, int bx0, int by0,
                            int block_size, int dx, int dy) {
  std::uint64_t sum = 0;
  for (int y = by0; y < by0 + block_size; ++y) {
    for (int x = bx0; x < bx0 + block_size; ++x) {
      for (int c = 0; c < cur.channels; ++c) {
        const int a = cur.at(x, y, c);
        const int b = sample_int(prev, x - dx, y - dy, c);
        sum += static_cast<std::uint64_t>(std::abs(a - b));
      }
    }
  }
  return sum;
}

std::uint64_t block_sad_subpel(const FrameBuffer& prev, const FrameBuffer& cur, int bx0, int by0,
                               int block_size, double dx, double dy) {
  std::uint64_t sum = 0;
  for (int y = by0; y < by0 + block_size; ++y) {
    for (int x = bx0; x < bx0 + block_size; ++x) {
      for (int c = 0; c < cur.channels; ++c) {
        const int a = cur.at(x, y, c);
        const int b = sample_subpel(prev, x - dx, y - dy, c);
        sum += static_cast<std::uint64_t>(std::abs(a - b));
      }
    }
  }
  return sum;
}

void check_me_geometry(const FrameBuffer& prev, const FrameBuffer& cur, int block_size) {
  if (!prev.same_shape(cur)) throw input_error("motion estimation: frame shapes differ");
  if (block_size <= 0) throw input_error("motion estimation: block size must be positive");
  if (cur.width % block_size != 0 || cur.height % block_size != 0)
    throw input_error("motion estimation: dimensions not divisible by block size");
}

}  // namespace

std::uint8_t sample_subpel(const FrameBuffer& f, double x, double y, int c) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  if (fx == 0.0 && fy == 0.0) return sample_int(f, x0, y0, c);
  const double v00 = sample_int(f, x0, y0, c);
  const double v10 = sample_int(f, x0 + 1, y0, c);
  const double v01 = sample_int(f, x0, y0 + 1, c);
  const double v11 = sample_int(f, x0 + 1, y0 + 1, c);
  const double v = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

MotionField estimate_motion(const FrameBuffer& prev, const FrameBuffer& cur, int block_size,
                            int search_range, int subpel_scale) {
  check_me_geometry(prev, cur, block_size);
  if (search_range < 1) throw input_error("motion estimation: search range must be >= 1");
  if (subpel_scale != 1 && subpel_scale != 2 && subpel_scale != 4)
    throw input_error("motion estimation: subpel scale must be 1, 2, or 4");

  const int grid_w = cur.width / block_size;
  const int grid_h = cur.height / block_size;
  MotionField field(grid_w, grid_h, block_size, subpel_scale);

  for (int by = 0; by < grid_h; ++by) {
    for (int bx = 0; bx < grid_w; ++bx) {
      const int px = bx * block_size;
      const int py = by * block_size;

      // Integer full search. Candidates scan row-major (dy outer, dx inner);
      // ties keep the earlier winner only when it is also no worse in |v|_1.
      std::uint64_t best_sad = std::numeric_limits<std::uint64_t>::max();
      int best_dx = 0, best_dy = 0;
      for (int dy = -search_range; dy <= search_range; ++dy) {
        for (int dx = -search_range; dx <= search_range; ++dx) {
          const std::uint64_t sad = block_sad_int(prev, cur, px, py, block_size, dx, dy);
          if (sad < best_sad ||
              (sad == best_sad && std::abs(dx) + std::abs(dy) < std::abs(best_dx) + std::abs(best_dy))) {
            best_sad = sad;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }

      double vx = best_dx, vy = best_dy;
      // Half-pel pass, then quarter-pel, each one step around the running
      // optimum: the sub-pel precision ladder.
      for (double step : {0.5, 0.25}) {
        if ((step == 0.5 && subpel_scale < 2) || (step == 0.25 && subpel_scale < 4)) continue;
        std::uint64_t local_best = block_sad_subpel(prev, cur, px, py, block_size, vx, vy);
        double lx = vx, ly = vy;
        for (int sy = -1; sy <= 1; ++sy) {
          for (int sx = -1; sx <= 1; ++sx) {
            if (sx == 0 && sy == 0) continue;
            const double cx = vx + sx * step;
            const double cy = vy + sy * step;
            if (std::abs(cx) > search_range || std::abs(cy) > search_range) continue;
            const std::uint64_t sad = block_sad_subpel(prev, cur, px, py, block_size, cx, cy);
            if (sad < local_best ||
                (sad == local_best &&
                 std::abs(cx) + std::abs(cy) < std::abs(lx) + std::abs(ly))) {
              local_best = sad;
              lx = cx;
              ly = cy;
            }
          }
        }
        vx = lx;
        vy = ly;
      }

      field.at(bx, by) = {static_cast<std::int16_t>(std::lround(vx * subpel_scale)),
                          static_cast<std::int16_t>(std::lround(vy * subpel_scale))};
    }
  }
  return field;
}

FrameBuffer warp(const FrameBuffer& prev, const MotionField& field) {
  if (!field.matches_frame(prev)) throw input_error("warp: field geometry does not match frame");
  FrameBuffer out(prev.width, prev.height, prev.channels);
  const int bs = field.block_size;
  for (int by = 0; by < field.grid_h; ++by) {
    for (int bx = 0; bx < field.grid_w; ++bx) {
      const auto [mx, my] = field.at(bx, by);
      const double dx = static_cast<double>(mx) / field.subpel_scale;
      const double dy = static_cast<double>(my) / field.subpel_scale;
      const bool integral = (mx % field.subpel_scale == 0) && (my % field.subpel_scale == 0);
      for (int y = by * bs; y < (by + 1) * bs; ++y) {
        for (int x = bx * bs; x < (bx + 1) * bs; ++x) {
          for (int c = 0; c < prev.channels; ++c) {
            out.at(x, y, c) = integral
                                  ? sample_int(prev, x - static_cast<int>(dx), y - static_cast<int>(dy), c)
                                  : sample_subpel(prev, x - dx, y - dy, c);
          }
        }
      }
    }
  }
  return out;
}

ResidualMap compute_residual(const FrameBuffer& cur, const FrameBuffer& warped) {
  if (!cur.same_shape(warped)) throw input_error("residual: frame shapes differ");
  ResidualMap res(cur.width, cur.height, cur.channels);
  for (std::size_t i = 0; i < cur.data.size(); ++i)
    res.data[i] = static_cast<std::int16_t>(static_cast<int>(cur.data[i]) - static_cast<int>(warped.data[i]));
  return res;
}

}  // namespace tristream
