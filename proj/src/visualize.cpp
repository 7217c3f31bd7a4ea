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

#include "tristream/visualize.hpp"

#include <algorithm>
#include <cmath>

namespace tristream {

namespace {

// Pure hue (HSV with S=V=1) to RGB in [0, 255].
void hue_to_rgb(double hue_deg, double rgb[3]) {
  const double h = hue_deg / 60.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  if (h < 1) { r = 1; g = x; }
  else if (h < 2) { r = x; g = 1; }
  else if (h < 3) { g = 1; b = x; }
  else if (h < 4) { g = x; b = 1; }
  else if (h < 5) { r = x; b = 1; }
  else { r = 1; b = x; }
  rgb[0] = 255 * r;
  rgb[1] = 255 * g;
  rgb[2] = 255 * b;
}

std::uint8_t blend_mid_gray(double pure, double saturation) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(128.0 + saturation * (pure - 128.0)), 0L, 255L));
}

}  // namespace

FrameBuffer render_mv(const MotionField& field) {
  double max_mag = 0.0;
  for (const auto& [mx, my] : field.mv)
    max_mag = std::max(max_mag, std::hypot(static_cast<double>(mx), static_cast<double>(my)));

  FrameBuffer out(field.grid_w * field.block_size, field.grid_h * field.block_size, 3, 128);
  if (max_mag == 0.0) return out;  // uniform mid gray for a still field

  for (int by = 0; by < field.grid_h; ++by) {
    for (int bx = 0; bx < field.grid_w; ++bx) {
      const auto [mx, my] = field.at(bx, by);
      const double mag = std::hypot(static_cast<double>(mx), static_cast<double>(my));
      double rgb[3] = {128, 128, 128};
      if (mag > 0.0) {
        double hue = std::atan2(static_cast<double>(my), static_cast<double>(mx)) * 180.0 / M_PI;
        if (hue < 0) hue += 360.0;
        if (hue >= 360.0) hue = 0.0;
        double pure[3];
        hue_to_rgb(hue, pure);
        for (int c = 0; c < 3; ++c) rgb[c] = blend_mid_gray(pure[c], mag / max_mag);
      }
      for (int y = by * field.block_size; y < (by + 1) * field.block_size; ++y)
        for (int x = bx * field.block_size; x < (bx + 1) * field.block_size; ++x)
          for (int c = 0; c < 3; ++c)
            out.at(x, y, c) = static_cast<std::uint8_t>(rgb[c]);
    }
  }
  return out;
}

FrameBuffer render_residual(const ResidualMap& res) {
  FrameBuffer out(res.width, res.height, res.channels);
  for (std::size_t i = 0; i < res.data.size(); ++i) {
    const long v = std::lround(128.0 + res.data[i] / 2.0);
    out.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
  }
  return out;
}

}  // namespace tristream
