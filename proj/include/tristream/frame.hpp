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
#include <string>
#include <vector>

#include "tristream/common.hpp"

namespace tristream {

/// One raw frame: 8-bit samples, row-major, channel-interleaved.
struct FrameBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> data;

  FrameBuffer() = default;
  FrameBuffer(int w, int h, int c, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

  std::size_t size_bytes() const { return data.size(); }
  bool same_shape(const FrameBuffer& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Ordered frames sharing one geometry. fps is informational.
struct FrameSequence {
  std::vector<FrameBuffer> frames;
  double fps = 30.0;

  int length() const { return static_cast<int>(frames.size()); }
};

/// One synthetic moving object. Velocities are per frame, integer or
/// half-integer pixels; half-integer motion is rendered by area coverage so
/// the translation property holds exactly at the half-pel grid.
struct SceneObject {
  enum class Shape { rect, ellipse };
  Shape shape = Shape::rect;
  int size = 16;            // square bounding box, pixels
  double vx = 0.0;          // pixels/frame
  double vy = 0.0;
  std::uint8_t intensity = 255;
};

/// Deterministic synthetic scene: the test oracle for motion semantics.
/// Object start positions are drawn from `seed` inside the box that keeps the
/// whole trajectory in frame; an empty box is an error naming the object.
struct SceneSpec {
  std::vector<SceneObject> objects;
  std::uint8_t background = 0;
  int noise_amplitude = 0;  // additive uniform in [-amp, amp], clamped
  std::uint64_t seed = 0;
};

/// Per-object start position actually used by the generator, for tests that
/// need the ground-truth support of each object.
struct ScenePlacement {
  std::vector<std::pair<double, double>> origins;  // top-left corner at frame 0
};

FrameSequence gen_synthetic(const SceneSpec& spec, int frame_count, int width, int height,
                            ScenePlacement* placement = nullptr);

/// Raw planar file: concatenated frames, no header. Frame count is derived
/// from the file size, which must divide exactly.
FrameSequence load_raw(const std::string& path, int width, int height, int channels,
                       double fps = 30.0);
void save_raw(const FrameSequence& seq, const std::string& path);

/// Binary PGM (P5) for 1 channel, PPM (P6) for 3, maxval 255.
void save_ppm(const FrameBuffer& frame, const std::string& path);
FrameBuffer load_ppm(const std::string& path);

}  // namespace tristream
