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

#include "tristream/extract.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace tristream {

namespace {

FrameBuffer downscale_box(const FrameBuffer& f, int factor) {
  if (factor <= 1) return f;
  if (f.width % factor != 0 || f.height % factor != 0)
    throw input_error("ifr downscale: dimensions not divisible by factor");
  FrameBuffer out(f.width / factor, f.height / factor, f.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < f.channels; ++c) {
        long sum = 0;
        for (int sy = 0; sy < factor; ++sy)
          for (int sx = 0; sx < factor; ++sx)
            sum += f.at(x * factor + sx, y * factor + sy, c);
        out.at(x, y, c) = static_cast<std::uint8_t>(
            std::lround(static_cast<double>(sum) / (factor * factor)));
      }
    }
  }
  return out;
}

MotionField aggregate_fields(const std::vector<MotionField>& steps, MvAggregation agg) {
  MotionField out = steps.back();  // geometry template
  const std::size_t cells = out.mv.size();
  if (agg == MvAggregation::last) return out;
  if (agg == MvAggregation::mean) {
    for (std::size_t i = 0; i < cells; ++i) {
      double sx = 0, sy = 0;
      for (const auto& f : steps) {
        sx += f.mv[i].first;
        sy += f.mv[i].second;
      }
      out.mv[i] = {static_cast<std::int16_t>(std::lround(sx / steps.size())),
                   static_cast<std::int16_t>(std::lround(sy / steps.size()))};
    }
    return out;
  }
  // max_mag: per cell, the step vector with the largest magnitude; earlier
  // step wins ties.
  for (std::size_t i = 0; i < cells; ++i) {
    long best = -1;
    for (const auto& f : steps) {
      const long m = static_cast<long>(f.mv[i].first) * f.mv[i].first +
                     static_cast<long>(f.mv[i].second) * f.mv[i].second;
      if (m > best) {
        best = m;
        out.mv[i] = f.mv[i];
      }
    }
  }
  return out;
}

ResidualMap aggregate_residuals(const std::vector<ResidualMap>& steps, MvAggregation agg) {
  if (agg == MvAggregation::last) return steps.back();
  ResidualMap out = steps.back();
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    double sum = 0;
    for (const auto& r : steps) sum += r.data[i];
    out.data[i] = static_cast<std::int16_t>(std::lround(sum / steps.size()));
  }
  return out;
}

}  // namespace

std::vector<TriStreamInterval> extract_tristream(const FrameSequence& seq,
                                                 const Decomposition& decomp,
                                                 const BackendChoice& backend,
                                                 const ExtractParams& params) {
  const int frame_count = seq.length();
  if (frame_count < 2) throw input_error("extract: need at least 2 frames");
  if (decomp.frame_count != frame_count)
    throw input_error("extract: decomposition built for " + std::to_string(decomp.frame_count) +
                      " frames, sequence has " + std::to_string(frame_count));
  for (const auto& iv : decomp.intervals) {
    if (iv.first_frame < 1 || iv.last_frame > frame_count || iv.first_frame > iv.last_frame)
      throw input_error("extract: interval outside sequence");
  }
  if (backend.kind == BackendKind::sidecar_export && params.sidecar == nullptr)
    throw input_error("extract: sidecar backend selected but no records supplied");

  // The mpeg4 emulation profile: half-pel precision, fixed 16x16 blocks.
  int block_size = params.block_size;
  int subpel_scale = params.subpel_scale;
  if (backend.kind == BackendKind::native_fixed_gop) {
    block_size = 16;
    subpel_scale = 2;
  }

  const FrameBuffer& first = seq.frames.front();
  if (first.width % block_size != 0 || first.height % block_size != 0)
    throw input_error("extract: frame dimensions not divisible by block size");
  const int grid_w = first.width / block_size;
  const int grid_h = first.height / block_size;

  std::vector<TriStreamInterval> out(decomp.intervals.size());

  auto process = [&](std::size_t k) {
    const Interval& iv = decomp.intervals[k];
    TriStreamInterval tsi;
    tsi.ifr = downscale_box(seq.frames[static_cast<std::size_t>(iv.first_frame) - 1],
                            params.ifr_downscale);

    std::vector<MotionField> step_fields;
    std::vector<ResidualMap> step_residuals;
    const int last_step = std::min(iv.last_frame, frame_count - 1);
    for (int t = iv.first_frame; t <= last_step; ++t) {
      const FrameBuffer& prev = seq.frames[static_cast<std::size_t>(t) - 1];
      const FrameBuffer& cur = seq.frames[static_cast<std::size_t>(t)];
      MotionField field;
      if (backend.kind == BackendKind::sidecar_export) {
        field = sidecar_to_field(*params.sidecar, t + 1, cur.width, cur.height, block_size);
        bool any = false;
        for (const auto& r : *params.sidecar) any |= (r.framenum == t + 1);
        if (!any)
          throw input_error("extract: sidecar records missing for frame " + std::to_string(t + 1));
      } else {
        field = estimate_motion(prev, cur, block_size, params.search_range, subpel_scale);
      }
      step_residuals.push_back(compute_residual(cur, warp(prev, field)));
      step_fields.push_back(std::move(field));
    }

    if (step_fields.empty()) {
      tsi.mv = MotionField(grid_w, grid_h, block_size, subpel_scale);
      tsi.res = ResidualMap(first.width, first.height, first.channels);
    } else {
      tsi.mv = aggregate_fields(step_fields, params.mv_agg);
      tsi.res = aggregate_residuals(step_residuals, params.mv_agg);
    }
    out[k] = std::move(tsi);
  };

  const int threads = std::max(1, params.threads);
  if (threads == 1 || out.size() <= 1) {
    for (std::size_t k = 0; k < out.size(); ++k) process(k);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    const std::size_t stride =
        (out.size() + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
    for (int w = 0; w < threads && next < out.size(); ++w) {
      const std::size_t lo = next;
      const std::size_t hi = std::min(out.size(), lo + stride);
      next = hi;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t k = lo; k < hi; ++k) process(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_i16(std::string& buf, std::int16_t v) {
  const std::uint16_t u = static_cast<std::uint16_t>(v);
  buf.push_back(static_cast<char>(u & 0xff));
  buf.push_back(static_cast<char>((u >> 8) & 0xff));
}

class TrsReader {
public:
  explicit TrsReader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    const std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    pos_ += 4;
    return v;
  }

  std::int16_t i16(const char* what) {
    need(2, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    const std::uint16_t v = static_cast<std::uint16_t>(p[0]) | (static_cast<std::uint16_t>(p[1]) << 8);
    pos_ += 2;
    return static_cast<std::int16_t>(v);
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }

  [[noreturn]] void fail_at(std::size_t offset, const std::string& what) const {
    std::ostringstream msg;
    msg << path_ << ": bad byte at offset " << offset << ": " << what;
    throw format_error(msg.str());
  }

private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) fail(std::string("truncated ") + what);
  }

  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_trs(const std::vector<TriStreamInterval>& intervals, const std::string& path) {
  if (intervals.empty()) throw input_error("write_trs: no intervals");
  const auto& head = intervals.front();
  for (const auto& iv : intervals) {
    if (iv.ifr.width != head.ifr.width || iv.ifr.height != head.ifr.height ||
        iv.ifr.channels != head.ifr.channels || iv.mv.grid_w != head.mv.grid_w ||
        iv.mv.grid_h != head.mv.grid_h || iv.mv.block_size != head.mv.block_size ||
        iv.mv.subpel_scale != head.mv.subpel_scale || iv.res.channels != head.res.channels)
      throw input_error("write_trs: intervals have mixed geometry");
  }

  std::string buf;
  buf += "TRS1";
  put_u32(buf, 1);
  put_u32(buf, static_cast<std::uint32_t>(intervals.size()));
  put_u32(buf, static_cast<std::uint32_t>(head.mv.block_size));
  put_u32(buf, static_cast<std::uint32_t>(head.mv.subpel_scale));
  put_u32(buf, static_cast<std::uint32_t>(head.ifr.width));
  put_u32(buf, static_cast<std::uint32_t>(head.ifr.height));
  put_u32(buf, static_cast<std::uint32_t>(head.mv.grid_w));
  put_u32(buf, static_cast<std::uint32_t>(head.mv.grid_h));
  put_u32(buf, static_cast<std::uint32_t>(head.ifr.channels));

  for (const auto& iv : intervals) {
    buf.append(reinterpret_cast<const char*>(iv.ifr.data.data()), iv.ifr.data.size());
    for (const auto& [mx, my] : iv.mv.mv) {
      put_i16(buf, mx);
      put_i16(buf, my);
    }
    for (const std::int16_t v : iv.res.data) put_i16(buf, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw input_error("write failed for " + path);
}

std::vector<TriStreamInterval> read_trs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  TrsReader r(ss.str(), path);

  char magic[4];
  for (char& m : magic) m = static_cast<char>(r.u8("magic"));
  if (std::memcmp(magic, "TRS1", 4) != 0) r.fail_at(0, "expected magic 'TRS1'");

  // Each header field's error points at the field's own first byte.
  auto header_u32 = [&](const char* what, auto&& valid, const char* constraint) {
    const std::size_t at = r.pos();
    const std::uint32_t v = r.u32(what);
    if (!valid(v)) r.fail_at(at, std::string(what) + " " + std::to_string(v) + ": " + constraint);
    return v;
  };
  constexpr std::uint32_t kDimLimit = 1u << 20;
  const auto plausible = [](std::uint32_t v) { return v >= 1 && v <= kDimLimit; };
  header_u32("version", [](std::uint32_t v) { return v == 1; }, "only version 1 is supported");
  const std::uint32_t k = header_u32("interval count", plausible, "implausible");
  const std::uint32_t block_size =
      header_u32("block size", [](std::uint32_t v) { return v >= 1 && v <= 256; }, "implausible");
  const std::uint32_t subpel_scale = header_u32(
      "subpel scale", [](std::uint32_t v) { return v == 1 || v == 2 || v == 4; }, "must be 1, 2, or 4");
  const std::uint32_t ifr_w = header_u32("ifr width", plausible, "implausible");
  const std::uint32_t ifr_h = header_u32("ifr height", plausible, "implausible");
  const std::uint32_t grid_w = header_u32("grid width", plausible, "implausible");
  const std::uint32_t grid_h = header_u32("grid height", plausible, "implausible");
  const std::uint32_t channels =
      header_u32("channels", [](std::uint32_t v) { return v == 1 || v == 3; }, "must be 1 or 3");

  const std::size_t ifr_bytes = static_cast<std::size_t>(ifr_w) * ifr_h * channels;
  const std::size_t mv_cells = static_cast<std::size_t>(grid_w) * grid_h;
  const std::size_t res_vals =
      static_cast<std::size_t>(grid_w) * block_size * grid_h * block_size * channels;
  const std::size_t record_bytes = ifr_bytes + mv_cells * 4 + res_vals * 2;
  if (r.remaining() != static_cast<std::size_t>(k) * record_bytes)
    r.fail("payload is " + std::to_string(r.remaining()) + " bytes, expected " +
           std::to_string(static_cast<std::size_t>(k) * record_bytes));

  std::vector<TriStreamInterval> intervals;
  intervals.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    TriStreamInterval iv;
    iv.ifr = FrameBuffer(static_cast<int>(ifr_w), static_cast<int>(ifr_h), static_cast<int>(channels));
    for (auto& b : iv.ifr.data) b = r.u8("ifr pixel");
    iv.mv = MotionField(static_cast<int>(grid_w), static_cast<int>(grid_h),
                        static_cast<int>(block_size), static_cast<int>(subpel_scale));
    for (auto& [mx, my] : iv.mv.mv) {
      mx = r.i16("mv x");
      my = r.i16("mv y");
    }
    iv.res = ResidualMap(static_cast<int>(grid_w * block_size), static_cast<int>(grid_h * block_size),
                         static_cast<int>(channels));
    for (auto& v : iv.res.data) v = r.i16("residual");
    intervals.push_back(std::move(iv));
  }
  return intervals;
}

LatencyReport bench_backend(const FrameSequence& seq, const Decomposition& decomp,
                            const BackendChoice& backend, const ExtractParams& params,
                            int repeats) {
  if (repeats < 1) throw input_error("bench: repeats must be >= 1");
  if (seq.fps <= 0) throw input_error("bench: sequence fps must be positive");

  ExtractParams timed = params;
  timed.threads = 1;

  std::vector<double> walls;
  walls.reserve(repeats);
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)extract_tristream(seq, decomp, backend, timed);
    const auto t1 = std::chrono::steady_clock::now();
    walls.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(walls.begin(), walls.end());
  const std::size_t n = walls.size();
  const double median = (n % 2 == 1) ? walls[n / 2] : 0.5 * (walls[n / 2 - 1] + walls[n / 2]);

  LatencyReport report;
  report.backend = backend;
  report.video_seconds = seq.length() / seq.fps;
  report.wall_ms = median;
  report.ms_per_video_second = median / report.video_seconds;
  report.threads = 1;
  return report;
}

}  // namespace tristream
