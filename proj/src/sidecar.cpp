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

#include "tristream/sidecar.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace tristream {

namespace {

int parse_int(std::string_view token, int line_no, int column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    std::ostringstream msg;
    msg << "sidecar line " << line_no << ", field " << column << ": '" << token
        << "' is not a decimal integer";
    throw format_error(msg.str());
  }
  return value;
}

}  // namespace

std::vector<SidecarRecord> parse_sidecar(std::string_view text) {
  std::vector<SidecarRecord> records;
  std::size_t pos = 0;
  int line_no = 0;
  bool saw_header = false;

  while (pos <= text.size()) {
    if (pos == text.size()) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;

    if (!saw_header) {
      if (line != kSidecarHeader)
        throw format_error("sidecar line 1: expected header '" + std::string(kSidecarHeader) + "'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    std::array<int, 12> f{};
    std::size_t start = 0;
    int field = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      const std::string_view token =
          comma == std::string_view::npos ? line.substr(start) : line.substr(start, comma - start);
      if (field >= 12) {
        throw format_error("sidecar line " + std::to_string(line_no) + ": expected 12 fields, found more");
      }
      f[field] = parse_int(token, line_no, field + 1);
      ++field;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (field != 12)
      throw format_error("sidecar line " + std::to_string(line_no) + ": expected 12 fields, found " +
                         std::to_string(field));

    SidecarRecord r;
    r.framenum = f[0];
    r.source = f[1];
    r.blockw = f[2];
    r.blockh = f[3];
    r.srcx = f[4];
    r.srcy = f[5];
    r.dstx = f[6];
    r.dsty = f[7];
    r.flags = f[8];
    r.motion_x = f[9];
    r.motion_y = f[10];
    r.motion_scale = f[11];
    records.push_back(r);
  }
  if (!saw_header) throw format_error("sidecar: missing header line");
  return records;
}

std::string write_sidecar(const std::vector<SidecarRecord>& records) {
  std::ostringstream out;
  out << kSidecarHeader << "\n";
  for (const auto& r : records) {
    out << r.framenum << ',' << r.source << ',' << r.blockw << ',' << r.blockh << ',' << r.srcx
        << ',' << r.srcy << ',' << r.dstx << ',' << r.dsty << ',' << r.flags << ',' << r.motion_x
        << ',' << r.motion_y << ',' << r.motion_scale << '\n';
  }
  return out.str();
}

MotionField sidecar_to_field(const std::vector<SidecarRecord>& records, int framenum,
                             int frame_w, int frame_h, int block_size) {
  if (frame_w % block_size != 0 || frame_h % block_size != 0)
    throw input_error("sidecar rasterization: frame dimensions not divisible by block size");

  int scale = 0;
  std::vector<const SidecarRecord*> frame_records;
  for (const auto& r : records) {
    if (r.framenum != framenum) continue;
    if (r.source != -1)
      throw input_error("sidecar rasterization: only past-reference records (source = -1) are supported");
    if (r.blockw != 4 && r.blockw != 8 && r.blockw != 16)
      throw format_error("sidecar record: block width must be 4, 8, or 16");
    if (r.blockh != 4 && r.blockh != 8 && r.blockh != 16)
      throw format_error("sidecar record: block height must be 4, 8, or 16");
    if (scale == 0) scale = r.motion_scale;
    if (r.motion_scale != scale)
      throw format_error("sidecar rasterization: mixed motion_scale values (" + std::to_string(scale) +
                         " vs " + std::to_string(r.motion_scale) + ")");
    const int x0 = r.dstx - r.blockw / 2;
    const int y0 = r.dsty - r.blockh / 2;
    if (x0 < 0 || y0 < 0 || x0 + r.blockw > frame_w || y0 + r.blockh > frame_h)
      throw format_error("sidecar record at frame " + std::to_string(framenum) + ": block outside frame");
    frame_records.push_back(&r);
  }
  if (scale == 0) scale = 1;  // no records: all-zero field at full-pel scale

  MotionField field(frame_w / block_size, frame_h / block_size, block_size, scale);
  for (int by = 0; by < field.grid_h; ++by) {
    for (int bx = 0; bx < field.grid_w; ++bx) {
      const double cx = bx * block_size + block_size / 2.0;
      const double cy = by * block_size + block_size / 2.0;
      for (const SidecarRecord* r : frame_records) {
        const double x0 = r->dstx - r->blockw / 2.0;
        const double y0 = r->dsty - r->blockh / 2.0;
        if (cx >= x0 && cx < x0 + r->blockw && cy >= y0 && cy < y0 + r->blockh)
          field.at(bx, by) = {static_cast<std::int16_t>(r->motion_x),
                              static_cast<std::int16_t>(r->motion_y)};
      }
    }
  }
  return field;
}

std::vector<SidecarRecord> field_to_sidecar(const MotionField& field, int framenum) {
  if (field.block_size != 4 && field.block_size != 8 && field.block_size != 16)
    throw input_error("sidecar export: block size must be 4, 8, or 16");
  std::vector<SidecarRecord> records;
  records.reserve(field.mv.size());
  for (int by = 0; by < field.grid_h; ++by) {
    for (int bx = 0; bx < field.grid_w; ++bx) {
      const auto [mx, my] = field.at(bx, by);
      SidecarRecord r;
      r.framenum = framenum;
      r.source = -1;
      r.blockw = field.block_size;
      r.blockh = field.block_size;
      r.dstx = bx * field.block_size + field.block_size / 2;
      r.dsty = by * field.block_size + field.block_size / 2;
      r.srcx = r.dstx - mx / field.subpel_scale;
      r.srcy = r.dsty - my / field.subpel_scale;
      r.motion_x = mx;
      r.motion_y = my;
      r.motion_scale = field.subpel_scale;
      records.push_back(r);
    }
  }
  return records;
}

}  // namespace tristream
