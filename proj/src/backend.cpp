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

#include "tristream/backend.hpp"

namespace tristream {

const char* backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::native_fixed_gop: return "native_fixed_gop";
    case BackendKind::sidecar_export: return "sidecar_export";
    case BackendKind::rgb_proxy: return "rgb_proxy";
  }
  return "rgb_proxy";
}

BackendChoice route_backend(const std::string& codec_tag, bool native_available,
                            bool sidecar_available) {
  if (codec_tag.empty()) throw input_error("route_backend: codec tag must not be empty");

  if (codec_tag == "mpeg4" && native_available)
    return {BackendKind::native_fixed_gop, "mpeg4 with a fixed-GOP native reader available"};

  const bool sidecar_codec =
      codec_tag == "h264" || codec_tag == "hevc" || codec_tag == "vp9" || codec_tag == "av1";
  if (sidecar_codec && sidecar_available)
    return {BackendKind::sidecar_export, "motion-vector side-data export available for " + codec_tag};

  return {BackendKind::rgb_proxy,
          "no compressed-domain path for " + codec_tag + "; RGB proxy guarantees a working interface"};
}

}  // namespace tristream
