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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "tristream/common.hpp"
#include "tristream/sidecar.hpp"

using namespace tristream;

namespace {
const std::string kHeader(kSidecarHeader);
}

TEST_CASE("single record parses with sub-pel motion intact") {
  const auto records = parse_sidecar(kHeader + "\n2,-1,16,16,8,8,12,6,0,16,-8,4\n");
  REQUIRE(records.size() == 1);
  const auto& r = records[0];
  CHECK(r.framenum == 2);
  CHECK(r.source == -1);
  CHECK(r.blockw == 16);
  CHECK(r.srcx == 8);
  CHECK(r.dstx == 12);
  CHECK(r.motion_x == 16);
  CHECK(r.motion_y == -8);
  CHECK(r.motion_scale == 4);
  // (dst - src) * scale tracks motion_x / motion_y
  CHECK((r.dstx - r.srcx) * r.motion_scale == r.motion_x);
  CHECK((r.dsty - r.srcy) * r.motion_scale == r.motion_y);
}

TEST_CASE("empty body parses to an empty list") {
  CHECK(parse_sidecar(kHeader + "\n").empty());
  CHECK(parse_sidecar(kHeader).empty());
}

TEST_CASE("wrong field count names the line") {
  CHECK_THROWS_WITH_AS(parse_sidecar(kHeader + "\n2,-1,16,16,8,8,12,6,0,16,-8\n"),
                       doctest::Contains("line 2"), format_error);
}

TEST_CASE("non-integer field names line and field") {
  try {
    parse_sidecar(kHeader + "\n2,-1,16,16,8,8,12,6,0,16,zz,4\n");
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("field 11") != std::string::npos);
  }
}

TEST_CASE("missing header is rejected") {
  CHECK_THROWS_AS(parse_sidecar("2,-1,16,16,8,8,12,6,0,16,-8,4\n"), format_error);
  CHECK_THROWS_AS(parse_sidecar(""), format_error);
}

TEST_CASE("single 16x16 record fills only its grid cell") {
  const auto records = parse_sidecar(kHeader + "\n2,-1,16,16,8,8,8,8,0,16,-8,4\n");
  const MotionField field = sidecar_to_field(records, 2, 64, 64, 16);
  CHECK(field.subpel_scale == 4);
  CHECK(field.at(0, 0) == std::pair<std::int16_t, std::int16_t>{16, -8});
  for (int by = 0; by < 4; ++by)
    for (int bx = 0; bx < 4; ++bx)
      if (bx != 0 || by != 0) CHECK(field.at(bx, by) == std::pair<std::int16_t, std::int16_t>{0, 0});
}

TEST_CASE("four 8x8 records tiling one cell agree on the shared vector") {
  std::string text = kHeader + "\n";
  for (const auto& [cx, cy] : {std::pair{4, 4}, {12, 4}, {4, 12}, {12, 12}})
    text += "1,-1,8,8," + std::to_string(cx) + "," + std::to_string(cy) + "," +
            std::to_string(cx) + "," + std::to_string(cy) + ",0,6,2,2\n";
  const MotionField field = sidecar_to_field(parse_sidecar(text), 1, 32, 32, 16);
  CHECK(field.at(0, 0) == std::pair<std::int16_t, std::int16_t>{6, 2});
  CHECK(field.at(1, 0) == std::pair<std::int16_t, std::int16_t>{0, 0});
}

TEST_CASE("no records for the frame gives the all-zero field") {
  const auto records = parse_sidecar(kHeader + "\n5,-1,16,16,8,8,8,8,0,4,0,1\n");
  const MotionField field = sidecar_to_field(records, 9, 32, 32, 16);
  for (const auto& mv : field.mv) CHECK(mv == std::pair<std::int16_t, std::int16_t>{0, 0});
}

TEST_CASE("mixed motion scales within a frame are rejected") {
  const auto records = parse_sidecar(kHeader +
                                     "\n1,-1,16,16,8,8,8,8,0,4,0,2\n"
                                     "1,-1,16,16,24,8,24,8,0,4,0,4\n");
  CHECK_THROWS_AS(sidecar_to_field(records, 1, 32, 32, 16), format_error);
}

TEST_CASE("record block outside the frame is rejected") {
  const auto records = parse_sidecar(kHeader + "\n1,-1,16,16,60,8,60,8,0,0,0,1\n");
  CHECK_THROWS_AS(sidecar_to_field(records, 1, 32, 32, 16), format_error);
}

TEST_CASE("round trip: field to records to field reproduces covered cells") {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int gw = 2 + static_cast<int>(rng.below(4));
    const int gh = 2 + static_cast<int>(rng.below(4));
    const int scale = 1 << rng.below(3);
    MotionField field(gw, gh, 16, scale);
    for (auto& [mx, my] : field.mv) {
      mx = static_cast<std::int16_t>(rng.range(-8 * scale, 8 * scale));
      my = static_cast<std::int16_t>(rng.range(-8 * scale, 8 * scale));
    }
    const auto records = field_to_sidecar(field, 3);
    const std::string text = write_sidecar(records);
    const MotionField back = sidecar_to_field(parse_sidecar(text), 3, gw * 16, gh * 16, 16);
    CHECK(back.mv == field.mv);
    CHECK(back.subpel_scale == field.subpel_scale);
  }
}

TEST_CASE("serialization is bit-exact under reparse") {
  MotionField field(2, 2, 16, 2);
  field.at(1, 1) = {-5, 7};
  const std::string text = write_sidecar(field_to_sidecar(field, 1));
  const std::string again = write_sidecar(parse_sidecar(text));
  CHECK(text == again);
  CHECK(text.find("\r") == std::string::npos);  // LF line endings only
}
