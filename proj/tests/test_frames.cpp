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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tristream/frame.hpp"

using namespace tristream;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

SceneSpec one_rect(double vx, double vy, int size = 32, std::uint8_t intensity = 200) {
  SceneSpec spec;
  SceneObject obj;
  obj.shape = SceneObject::Shape::rect;
  obj.size = size;
  obj.vx = vx;
  obj.vy = vy;
  obj.intensity = intensity;
  spec.objects.push_back(obj);
  spec.seed = 42;
  return spec;
}

}  // namespace

TEST_CASE("translated rect: next frame equals previous shifted by the velocity") {
  const auto spec = one_rect(4, -2);
  ScenePlacement placement;
  const FrameSequence seq = gen_synthetic(spec, 3, 128, 128, &placement);
  REQUIRE(seq.length() == 3);

  const auto [ox, oy] = placement.origins[0];
  for (int t = 0; t + 1 < 3; ++t) {
    const FrameBuffer& a = seq.frames[t];
    const FrameBuffer& b = seq.frames[t + 1];
    // Check over the object's support (plus its boundary ring) in frame t.
    const int x0 = static_cast<int>(ox + 4 * t) - 1;
    const int y0 = static_cast<int>(oy - 2 * t) - 1;
    for (int y = y0; y < y0 + 34; ++y) {
      for (int x = x0; x < x0 + 34; ++x) {
        CHECK(b.at(x + 4, y - 2, 0) == a.at(x, y, 0));
      }
    }
  }
}

TEST_CASE("zero objects on zero background gives identical all-zero frames") {
  SceneSpec spec;
  spec.background = 0;
  const FrameSequence seq = gen_synthetic(spec, 2, 64, 64);
  for (const auto& f : seq.frames)
    for (const auto v : f.data) CHECK(v == 0);
  CHECK(seq.frames[0].data == seq.frames[1].data);
}

TEST_CASE("generator is deterministic for a fixed spec and seed") {
  SceneSpec spec = one_rect(2, 1, 24);
  spec.noise_amplitude = 10;
  spec.seed = 1234;
  const FrameSequence a = gen_synthetic(spec, 5, 64, 64);
  const FrameSequence b = gen_synthetic(spec, 5, 64, 64);
  REQUIRE(a.length() == b.length());
  for (int t = 0; t < a.length(); ++t) CHECK(a.frames[t].data == b.frames[t].data);
}

TEST_CASE("object that cannot stay in frame is rejected with its index") {
  SceneSpec spec = one_rect(40, 0, 32);
  spec.objects.push_back(spec.objects[0]);
  spec.objects[1].vx = 0;
  CHECK_THROWS_WITH_AS(gen_synthetic(spec, 4, 64, 64),
                       doctest::Contains("object 0"), input_error);
}

TEST_CASE("dimensions not divisible by 16 are rejected") {
  SceneSpec spec;
  CHECK_THROWS_AS(gen_synthetic(spec, 2, 60, 64), input_error);
  CHECK_THROWS_AS(gen_synthetic(spec, 2, 64, 50), input_error);
}

TEST_CASE("negative fractional travel keeps the object fully in frame") {
  // Odd half-integer travel makes the feasible-start box fractional; starts
  // must round inward, never outward.
  SceneSpec spec = one_rect(-0.5, -0.5, 16, 250);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    spec.seed = seed;
    ScenePlacement pl;
    const FrameSequence seq = gen_synthetic(spec, 4, 64, 64, &pl);
    CHECK(pl.origins[0].first - 0.5 * 3 >= 0.0);
    CHECK(pl.origins[0].second - 0.5 * 3 >= 0.0);
    // Frames 1 and 3 share the fractional phase, so frame 3 is frame 1
    // translated by exactly (-1, -1) and intensity mass matches exactly.
    long mass1 = 0, mass3 = 0;
    for (const auto v : seq.frames[1].data) mass1 += v;
    for (const auto v : seq.frames[3].data) mass3 += v;
    CHECK(mass1 == mass3);
  }
}

TEST_CASE("half-integer velocity translates the coverage-rendered mask exactly") {
  // At half-pel velocity (0.5, 0), frame t+2 equals frame t shifted by 1 px.
  const auto spec = one_rect(0.5, 0.0, 16);
  ScenePlacement placement;
  const FrameSequence seq = gen_synthetic(spec, 3, 64, 64, &placement);
  const int ox = static_cast<int>(placement.origins[0].first);
  const int oy = static_cast<int>(placement.origins[0].second);
  for (int y = std::max(0, oy - 1); y < std::min(64, oy + 18); ++y)
    for (int x = std::max(0, ox - 1); x < std::min(63, ox + 18); ++x)
      CHECK(seq.frames[2].at(x + 1, y, 0) == seq.frames[0].at(x, y, 0));
}

TEST_CASE("raw round trip: save then load is byte-identical") {
  const auto spec = one_rect(1, 1, 20);
  const FrameSequence seq = gen_synthetic(spec, 4, 32, 32);
  const auto path = temp_file("tristream_frames.raw");
  save_raw(seq, path.string());
  const FrameSequence back = load_raw(path.string(), 32, 32, 1);
  REQUIRE(back.length() == 4);
  for (int t = 0; t < 4; ++t) CHECK(back.frames[t].data == seq.frames[t].data);
  std::filesystem::remove(path);
}

TEST_CASE("load_raw derives the frame count and rejects size mismatches") {
  const auto path = temp_file("tristream_frames2.raw");
  {
    std::ofstream out(path, std::ios::binary);
    std::vector<char> bytes(512, 7);
    out.write(bytes.data(), 512);
  }
  const FrameSequence seq = load_raw(path.string(), 16, 16, 1);
  CHECK(seq.length() == 2);

  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out.put(0);
  }
  CHECK_THROWS_WITH_AS(load_raw(path.string(), 16, 16, 1), doctest::Contains("513"), format_error);
  std::filesystem::remove(path);
}

TEST_CASE("load_raw rejects single-frame files") {
  const auto path = temp_file("tristream_frames3.raw");
  {
    std::ofstream out(path, std::ios::binary);
    std::vector<char> bytes(256, 1);
    out.write(bytes.data(), 256);
  }
  CHECK_THROWS_AS(load_raw(path.string(), 16, 16, 1), format_error);
  std::filesystem::remove(path);
}

TEST_CASE("PGM output is bit-exact for the 2x2 gray example") {
  FrameBuffer f(2, 2, 1, 128);
  const auto path = temp_file("tristream_gray.pgm");
  save_ppm(f, path.string());

  std::ifstream in(path, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(contents.size() == 15);
  CHECK(contents.substr(0, 11) == "P5\n2 2\n255\n");
  for (int i = 11; i < 15; ++i) CHECK(static_cast<unsigned char>(contents[i]) == 0x80);
  std::filesystem::remove(path);
}

TEST_CASE("PPM output carries 12 payload bytes for a 2x2 color frame") {
  FrameBuffer f(2, 2, 3, 10);
  const auto path = temp_file("tristream_color.ppm");
  save_ppm(f, path.string());
  std::ifstream in(path, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(contents.substr(0, 11) == "P6\n2 2\n255\n");
  CHECK(contents.size() == 11 + 12);
  std::filesystem::remove(path);
}

TEST_CASE("PPM round trip reloads identical samples") {
  const auto spec = one_rect(0, 0, 24, 90);
  const FrameSequence seq = gen_synthetic(spec, 2, 32, 32);
  const auto path = temp_file("tristream_rt.pgm");
  save_ppm(seq.frames[0], path.string());
  const FrameBuffer back = load_ppm(path.string());
  CHECK(back.width == 32);
  CHECK(back.channels == 1);
  CHECK(back.data == seq.frames[0].data);
  std::filesystem::remove(path);
}

TEST_CASE("unwritable path raises an I/O error") {
  FrameBuffer f(2, 2, 1, 0);
  CHECK_THROWS_AS(save_ppm(f, "/nonexistent-dir/x.pgm"), input_error);
}
