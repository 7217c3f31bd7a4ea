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

#include <functional>
#include <string>
#include <vector>

#include "tristream/adapter.hpp"

namespace tristream {

enum class PlacementStrategy { prefix, per_anchor, suffix };

/// The one-hot selector stored sparsely: a strictly increasing list of the
/// K*K_m placeholder positions inside a length-S sequence. Positions never
/// overlap anchor token spans.
struct PlaceholderLayout {
  int seq_len = 0;  // S
  PlacementStrategy strategy = PlacementStrategy::per_anchor;
  std::vector<int> positions;

  int slot_count() const { return static_cast<int>(positions.size()); }
};

struct AnchorSpan {
  int start = 0;
  int len = 0;
};

/// prefix: all slots immediately before the first span; per_anchor: K_m slots
/// directly after each span; suffix: all slots after the last span. Errors
/// when spans overlap or the slots do not fit.
PlaceholderLayout build_layout(PlacementStrategy strategy, const std::vector<AnchorSpan>& spans,
                               int intervals, int tokens_per_interval, int seq_len);

/// Embedding sequence with per-row stop-gradient flags; placeholder rows are
/// frozen before injection.
struct EmbeddingSeq {
  Mat e;  // S x d
  std::vector<bool> frozen;

  Eigen::Index seq_len() const { return e.rows(); }
};

/// Which source a row of the injected sequence came from: -1 for the original
/// sequence, otherwise the motion-token row index.
struct InjectResult {
  EmbeddingSeq seq;
  std::vector<int> provenance;
};

/// Out-of-place scatter write: row positions[j] of the result is motion token
/// j, every other row copies the input. The input is never mutated.
InjectResult scatter_inject(const EmbeddingSeq& seq, const PlaceholderLayout& layout,
                            const Mat& motion_tokens);

/// Numeric check of the injection's gradient routing under a scalar loss of
/// the injected sequence: overwritten placeholder rows of E must have zero
/// sensitivity, pass-through rows unit routing, and motion-token rows exactly
/// the sensitivity of their target rows.
struct GradFlowReport {
  double max_violation = 0.0;
  bool ok = true;
  std::vector<std::string> violations;
};

GradFlowReport grad_flow_check(const EmbeddingSeq& seq, const PlaceholderLayout& layout,
                               const Mat& motion_tokens,
                               const std::function<double(const Mat&)>& downstream_loss,
                               double eps = 1e-5);

}  // namespace tristream
