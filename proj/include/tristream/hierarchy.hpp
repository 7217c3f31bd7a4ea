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
#include <vector>

#include "tristream/common.hpp"

namespace tristream {

/// Frame numbers are 1-based throughout this module, matching the anchor
/// formula's domain [1, T].
struct Interval {
  int start_anchor = 0;  // index into the anchors list, 0-based
  int end_anchor = 0;
  int first_frame = 1;  // inclusive
  int last_frame = 1;   // inclusive
  int frame_span() const { return last_frame - first_frame + 1; }
};

enum class IntervalConvention {
  bracket,  // K = N_a: interval k covers [t_k, t_{k+1}), last covers [t_{N_a}, T]
  between,  // K = N_a - 1: interval k covers [t_k, t_{k+1})
};

enum class AnchorRule {
  center,    // centers of N_a equal bins
  endpoint,  // includes frame 1 and frame T
};

struct Decomposition {
  int frame_count = 0;       // T
  std::vector<int> anchors;  // sorted, 1-based, length N_a
  std::vector<Interval> intervals;

  int anchor_count() const { return static_cast<int>(anchors.size()); }
  int interval_count() const { return static_cast<int>(intervals.size()); }
};

struct TokenBudget {
  std::int64_t anchor_tokens = 0;
  std::int64_t motion_tokens = 0;
  std::int64_t text_overhead = 0;
  std::int64_t total = 0;
};

/// Bin-center sampling: t_i = floor((2i-1)*T / (2*N_a)) + 1, clamped to
/// [1, T]. With 1 <= N_a <= T the result is strictly increasing; a collision
/// after rounding is rejected.
std::vector<int> select_anchors(int frame_count, int anchor_count,
                                AnchorRule rule = AnchorRule::center);

std::vector<Interval> partition_intervals(const std::vector<int>& anchors, int frame_count,
                                          IntervalConvention convention = IntervalConvention::bracket);

Decomposition decompose(int frame_count, int anchor_count,
                        AnchorRule rule = AnchorRule::center,
                        IntervalConvention convention = IntervalConvention::bracket);

/// Exact integer accounting, no rounding:
/// anchor_tokens = N_a * T_vit, motion_tokens = K * K_m.
TokenBudget token_budget(std::int64_t anchor_count, std::int64_t tokens_per_frame,
                         std::int64_t interval_count, std::int64_t tokens_per_interval,
                         std::int64_t text_overhead);

}  // namespace tristream
