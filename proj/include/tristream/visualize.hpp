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

#include "tristream/extract.hpp"

namespace tristream {

/// Direction-to-hue, magnitude-to-saturation rendering of a motion field,
/// rasterized to the frame resolution. Zero vectors map to mid gray (128);
/// the strongest vector in the field saturates to the pure hue.
FrameBuffer render_mv(const MotionField& field);

/// Signed residual mapped to 128-centered gray: 128 + value/2.
FrameBuffer render_residual(const ResidualMap& res);

}  // namespace tristream
