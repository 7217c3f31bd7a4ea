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
#include <string_view>
#include <vector>

#include "tristream/motion.hpp"

namespace tristream {

/// One exported motion vector, mirroring the reference export tool's CSV row.
/// srcx/srcy and dstx/dsty are block-center pixel coordinates in the reference
/// and current frame; motion_x/motion_y are in sub-pel units, so
/// (dstx - srcx) * motion_scale ~ motion_x within one sub-pel unit.
struct SidecarRecord {
  int framenum = 0;   // current (destination) frame, 1-based
  int source = -1;    // -1 past reference, +1 future reference
  int blockw = 16;
  int blockh = 16;
  int srcx = 0;
  int srcy = 0;
  int dstx = 0;
  int dsty = 0;
  int flags = 0;
  int motion_x = 0;
  int motion_y = 0;
  int motion_scale = 1;
};

inline constexpr std::string_view kSidecarHeader =
    "framenum,source,blockw,blockh,srcx,srcy,dstx,dsty,flags,motion_x,motion_y,motion_scale";

/// Strict, locale-independent CSV parse. The first line must equal the header
/// exactly; every record line must carry 12 decimal integers. Errors name the
/// offending line and field.
std::vector<SidecarRecord> parse_sidecar(std::string_view text);

std::string write_sidecar(const std::vector<SidecarRecord>& records);

/// Rasterize the records of one frame onto a fixed block grid: each grid cell
/// takes the vector of the record whose destination block covers the cell
/// center (later records win on overlap); uncovered cells stay (0,0). All
/// records for the frame must share one motion_scale and lie inside the frame.
MotionField sidecar_to_field(const std::vector<SidecarRecord>& records, int framenum,
                             int frame_w, int frame_h, int block_size);

/// Inverse of sidecar_to_field on covered cells: one record per grid cell.
std::vector<SidecarRecord> field_to_sidecar(const MotionField& field, int framenum);

}  // namespace tristream
