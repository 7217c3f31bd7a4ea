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

#include "tristream/hierarchy.hpp"

#include <algorithm>
#include <string>

namespace tristream {

std::vector<int> select_anchors(int frame_count, int anchor_count, AnchorRule rule) {
  if (anchor_count < 1) throw input_error("select_anchors: need at least one anchor");
  if (anchor_count > frame_count)
    throw input_error("select_anchors: anchor count " + std::to_string(anchor_count) +
                      " exceeds frame count " + std::to_string(frame_count));

  std::vector<int> anchors(anchor_count);
  if (rule == AnchorRule::center) {
    for (int i = 1; i <= anchor_count; ++i) {
      const std::int64_t t =
          static_cast<std::int64_t>(2 * i - 1) * frame_count / (2 * static_cast<std::int64_t>(anchor_count)) + 1;
      anchors[i - 1] = static_cast<int>(std::clamp<std::int64_t>(t, 1, frame_count));
    }
  } else {
    if (anchor_count == 1) {
      anchors[0] = 1;
    } else {
      for (int i = 0; i < anchor_count; ++i) {
        const std::int64_t t =
            1 + static_cast<std::int64_t>(i) * (frame_count - 1) / (anchor_count - 1);
        anchors[i] = static_cast<int>(t);
      }
    }
  }

  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (anchors[i] <= anchors[i - 1])
      throw input_error("select_anchors: anchor collision after rounding at index " + std::to_string(i));
  }
  return anchors;
}

std::vector<Interval> partition_intervals(const std::vector<int>& anchors, int frame_count,
                                          IntervalConvention convention) {
  if (anchors.empty()) throw input_error("partition_intervals: empty anchor list");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (anchors[i] < 1 || anchors[i] > frame_count)
      throw input_error("partition_intervals: anchor out of range");
    if (i > 0 && anchors[i] <= anchors[i - 1])
      throw input_error("partition_intervals: anchors not strictly increasing");
  }

  const int n = static_cast<int>(anchors.size());
  std::vector<Interval> intervals;
  if (convention == IntervalConvention::bracket) {
    intervals.reserve(n);
    for (int k = 0; k < n; ++k) {
      Interval iv;
      iv.start_anchor = k;
      iv.end_anchor = (k + 1 < n) ? k + 1 : k;
      iv.first_frame = anchors[k];
      iv.last_frame = (k + 1 < n) ? anchors[k + 1] - 1 : frame_count;
      intervals.push_back(iv);
    }
  } else {
    if (n < 2) throw input_error("partition_intervals: 'between' needs at least two anchors");
    intervals.reserve(n - 1);
    for (int k = 0; k + 1 < n; ++k) {
      Interval iv;
      iv.start_anchor = k;
      iv.end_anchor = k + 1;
      iv.first_frame = anchors[k];
      iv.last_frame = anchors[k + 1] - 1;
      intervals.push_back(iv);
    }
  }
  return intervals;
}

Decomposition decompose(int frame_count, int anchor_count, AnchorRule rule,
                        IntervalConvention convention) {
  if (frame_count < 2) throw input_error("decompose: need at least 2 frames");
  Decomposition d;
  d.frame_count = frame_count;
  d.anchors = select_anchors(frame_count, anchor_count, rule);
  d.intervals = partition_intervals(d.anchors, frame_count, convention);
  return d;
}

TokenBudget token_budget(std::int64_t anchor_count, std::int64_t tokens_per_frame,
                         std::int64_t interval_count, std::int64_t tokens_per_interval,
                         std::int64_t text_overhead) {
  if (anchor_count < 0 || tokens_per_frame < 0 || interval_count < 0 ||
      tokens_per_interval < 0 || text_overhead < 0)
    throw input_error("token_budget: all operands must be nonnegative");
  TokenBudget b;
  b.anchor_tokens = anchor_count * tokens_per_frame;
  b.motion_tokens = interval_count * tokens_per_interval;
  b.text_overhead = text_overhead;
  b.total = b.anchor_tokens + b.motion_tokens + b.text_overhead;
  return b;
}

}  // namespace tristream
