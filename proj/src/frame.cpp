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

#include "tristream/frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tristream {

FrameBuffer::FrameBuffer(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * h * c, fill) {
  if (w <= 0 || h <= 0) throw input_error("frame dimensions must be positive");
  if (c != 1 && c != 3) throw input_error("channel count must be 1 or 3");
}

namespace {

bool half_integer(double v) { return std::abs(v * 2.0 - std::round(v * 2.0)) < 1e-9; }

// Fraction of pixel cell [px, px+1) x [py, py+1) covered by the object placed
// with its top-left corner at (ox, oy). Rects use exact box overlap; ellipses
// are supersampled 8x8, which translates exactly under integer and half-pel
// shifts because the sample offsets are fixed within the cell.
double coverage(const SceneObject& obj, double ox, double oy, int px, int py) {
  const double s = static_cast<double>(obj.size);
  if (obj.shape == SceneObject::Shape::rect) {
    const double x0 = std::max(static_cast<double>(px), ox);
    const double x1 = std::min(static_cast<double>(px + 1), ox + s);
    const double y0 = std::max(static_cast<double>(py), oy);
    const double y1 = std::min(static_cast<double>(py + 1), oy + s);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    return (x1 - x0) * (y1 - y0);
  }
  const double cx = ox + s / 2.0;
  const double cy = oy + s / 2.0;
  const double r = s / 2.0;
  int inside = 0;
  constexpr int kGrid = 8;
  for (int sy = 0; sy < kGrid; ++sy) {
    for (int sx = 0; sx < kGrid; ++sx) {
      const double x = px + (sx + 0.5) / kGrid;
      const double y = py + (sy + 0.5) / kGrid;
      const double dx = (x - cx) / r;
      const double dy = (y - cy) / r;
      if (dx * dx + dy * dy <= 1.0) ++inside;
    }
  }
  return static_cast<double>(inside) / (kGrid * kGrid);
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

FrameSequence gen_synthetic(const SceneSpec& spec, int frame_count, int width, int height,
                            ScenePlacement* placement) {
  if (frame_count < 2) throw input_error("synthetic sequence needs at least 2 frames");
  if (width % 16 != 0 || height % 16 != 0)
    throw input_error("synthetic frame dimensions must be divisible by 16");

  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    if (!half_integer(o.vx) || !half_integer(o.vy))
      throw input_error("object " + std::to_string(i) + ": velocity must be integer or half-integer");
    if (o.size <= 0 || o.size > std::min(width, height))
      throw input_error("object " + std::to_string(i) + ": size out of range");
  }

  SplitMix64 rng(spec.seed);
  std::vector<std::pair<double, double>> origins;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    const double travel_x = o.vx * (frame_count - 1);
    const double travel_y = o.vy * (frame_count - 1);
    // Integer start positions inside the box that keeps the whole trajectory
    // in frame; ceil/floor so fractional travel never pushes an edge out.
    const long xlo = static_cast<long>(std::ceil(std::max(0.0, -travel_x)));
    const long xhi = static_cast<long>(std::floor(std::min<double>(width - o.size, width - o.size - travel_x)));
    const long ylo = static_cast<long>(std::ceil(std::max(0.0, -travel_y)));
    const long yhi = static_cast<long>(std::floor(std::min<double>(height - o.size, height - o.size - travel_y)));
    if (xlo > xhi || ylo > yhi)
      throw input_error("object " + std::to_string(i) + " leaves the frame for the given velocity and length");
    const double x0 = static_cast<double>(rng.range(xlo, xhi));
    const double y0 = static_cast<double>(rng.range(ylo, yhi));
    origins.emplace_back(x0, y0);
  }
  if (placement) placement->origins = origins;

  FrameSequence seq;
  seq.frames.reserve(frame_count);
  for (int t = 0; t < frame_count; ++t) {
    FrameBuffer f(width, height, 1, spec.background);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      const auto& o = spec.objects[i];
      const double ox = origins[i].first + o.vx * t;
      const double oy = origins[i].second + o.vy * t;
      const int px0 = static_cast<int>(std::floor(ox)) - 1;
      const int py0 = static_cast<int>(std::floor(oy)) - 1;
      const int px1 = static_cast<int>(std::ceil(ox)) + o.size + 1;
      const int py1 = static_cast<int>(std::ceil(oy)) + o.size + 1;
      for (int y = std::max(0, py0); y < std::min(height, py1); ++y) {
        for (int x = std::max(0, px0); x < std::min(width, px1); ++x) {
          const double c = coverage(o, ox, oy, x, y);
          if (c <= 0.0) continue;
          const double base = f.at(x, y, 0);
          f.at(x, y, 0) = clamp_u8((1.0 - c) * base + c * o.intensity);
        }
      }
    }
    if (spec.noise_amplitude > 0) {
      const int amp = spec.noise_amplitude;
      for (auto& v : f.data) {
        const std::int64_t n = rng.range(-amp, amp);
        v = static_cast<std::uint8_t>(std::clamp<std::int64_t>(v + n, 0, 255));
      }
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

FrameSequence load_raw(const std::string& path, int width, int height, int channels,
                       double fps) {
  if (channels != 1 && channels != 3) throw input_error("channel count must be 1 or 3");
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw input_error("cannot open " + path);
  const std::streamoff file_size = in.tellg();
  in.seekg(0);

  const std::size_t frame_size = static_cast<std::size_t>(width) * height * channels;
  if (frame_size == 0 || static_cast<std::size_t>(file_size) % frame_size != 0) {
    std::ostringstream msg;
    msg << path << ": file size " << file_size << " is not a multiple of frame size "
        << frame_size << " (" << width << "x" << height << "x" << channels << ")";
    throw format_error(msg.str());
  }
  const std::size_t frame_count = static_cast<std::size_t>(file_size) / frame_size;
  if (frame_count < 2) throw format_error(path + ": needs at least 2 frames, found " + std::to_string(frame_count));

  FrameSequence seq;
  seq.fps = fps;
  seq.frames.reserve(frame_count);
  for (std::size_t t = 0; t < frame_count; ++t) {
    FrameBuffer f(width, height, channels);
    in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(frame_size));
    if (!in) throw format_error(path + ": short read at frame " + std::to_string(t));
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

void save_raw(const FrameSequence& seq, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path);
  for (const auto& f : seq.frames)
    out.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size()));
  if (!out) throw input_error("write failed for " + path);
}

void save_ppm(const FrameBuffer& frame, const std::string& path) {
  if (frame.channels != 1 && frame.channels != 3)
    throw input_error("PPM/PGM output needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path);
  out << (frame.channels == 3 ? "P6" : "P5") << "\n"
      << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data.data()), static_cast<std::streamsize>(frame.data.size()));
  if (!out) throw input_error("write failed for " + path);
}

FrameBuffer load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw format_error(path + ": not a binary PGM/PPM file");
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (!in || w <= 0 || h <= 0) throw format_error(path + ": bad header");
  if (maxval != 255) throw format_error(path + ": only maxval 255 is supported");
  in.get();  // single whitespace after header
  FrameBuffer f(w, h, magic == "P6" ? 3 : 1);
  in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size()));
  if (!in) throw format_error(path + ": truncated pixel data");
  return f;
}

}  // namespace tristream
