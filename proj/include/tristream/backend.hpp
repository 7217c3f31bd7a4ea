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

#include "tristream/common.hpp"

namespace tristream {

enum class BackendKind { native_fixed_gop, sidecar_export, rgb_proxy };

struct BackendChoice {
  BackendKind kind = BackendKind::rgb_proxy;
  std::string reason;
};

const char* backend_name(BackendKind kind);

/// Total routing function. A fixed-GOP native reader only exists for mpeg4;
/// the sidecar export path covers h264/hevc/vp9/av1; everything else — and
/// every case where the preferred path is unavailable — falls back to the
/// RGB-decoded proxy, which always works.
BackendChoice route_backend(const std::string& codec_tag, bool native_available,
                            bool sidecar_available);

}  // namespace tristream
