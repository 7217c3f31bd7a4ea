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

#include <string>
#include <vector>

#include "tristream/backend.hpp"
#include "tristream/frame.hpp"
#include "tristream/hierarchy.hpp"
#include "tristream/motion.hpp"
#include "tristream/sidecar.hpp"

namespace tristream {

/// One interval's bundle: I-frame context patch, motion field, residual map.
struct TriStreamInterval {
  FrameBuffer ifr;   // anchor frame downscaled by ExtractParams::ifr_downscale
  MotionField mv;
  ResidualMap res;
};

enum class MvAggregation { mean, last, max_mag };

struct ExtractParams {
  int block_size = 16;
  int search_range = 8;
  int subpel_scale = 4;  // the h264 profile; the mpeg4 profile forces 2
  MvAggregation mv_agg = MvAggregation::mean;
  int ifr_downscale = 2;
  int threads = 1;
  const std::vector<SidecarRecord>* sidecar = nullptr;  // required for sidecar_export
};

/// Per-interval tri-stream extraction. Motion is computed per consecutive
/// frame pair inside the interval (including the step onto the next anchor)
/// and aggregated per mv_agg; the residual is the per-step
/// motion-compensated residual aggregated the same way. The native fixed-GOP
/// backend is emulated as the RGB proxy pinned to half-pel, 16x16 blocks.
/// Intervals are independent; `threads` > 1 processes them concurrently.
std::vector<TriStreamInterval> extract_tristream(const FrameSequence& seq,
                                                 const Decomposition& decomp,
                                                 const BackendChoice& backend,
                                                 const ExtractParams& params);

/// .trs container: magic "TRS1", nine little-endian u32 header fields
/// {version=1, K, block_size, subpel_scale, ifr_w, ifr_h, grid_w, grid_h,
/// channels}, then K records of (I-frame bytes, mv as i16 pairs, residual as
/// i16), no padding. Read errors name the offset of the first bad byte.
void write_trs(const std::vector<TriStreamInterval>& intervals, const std::string& path);
std::vector<TriStreamInterval> read_trs(const std::string& path);

struct LatencyReport {
  BackendChoice backend;
  double video_seconds = 0.0;
  double wall_ms = 0.0;
  double ms_per_video_second = 0.0;
  int threads = 1;  // extraction is forced single-threaded while timing
};

/// Median wall time of `repeats` single-threaded extractions.
LatencyReport bench_backend(const FrameSequence& seq, const Decomposition& decomp,
                            const BackendChoice& backend, const ExtractParams& params,
                            int repeats);

}  // namespace tristream
