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

#include "tristream/inject.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tristream {

PlaceholderLayout build_layout(PlacementStrategy strategy, const std::vector<AnchorSpan>& spans,
                               int intervals, int tokens_per_interval, int seq_len) {
  if (intervals < 0 || tokens_per_interval < 0)
    throw input_error("build_layout: negative slot counts");
  const int slots = intervals * tokens_per_interval;

  std::vector<AnchorSpan> sorted = spans;
  std::sort(sorted.begin(), sorted.end(), [](const AnchorSpan& a, const AnchorSpan& b) {
    return a.start < b.start;
  });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.len <= 0 || s.start < 0 || s.start + s.len > seq_len)
      throw input_error("build_layout: span outside [0, S)");
    if (i > 0 && sorted[i - 1].start + sorted[i - 1].len > s.start)
      throw input_error("build_layout: overlapping anchor spans");
  }

  PlaceholderLayout layout;
  layout.seq_len = seq_len;
  layout.strategy = strategy;
  if (slots == 0) return layout;
  if (sorted.empty()) throw input_error("build_layout: no anchor spans");

  switch (strategy) {
    case PlacementStrategy::prefix: {
      const int first = sorted.front().start;
      if (first < slots)
        throw input_error("build_layout: no room for " + std::to_string(slots) +
                          " prefix slots before the first span at " + std::to_string(first));
      for (int i = 0; i < slots; ++i) layout.positions.push_back(first - slots + i);
      break;
    }
    case PlacementStrategy::suffix: {
      const auto& last = sorted.back();
      const int begin = last.start + last.len;
      if (begin + slots > seq_len)
        throw input_error("build_layout: no room for " + std::to_string(slots) +
                          " suffix slots after position " + std::to_string(begin));
      for (int i = 0; i < slots; ++i) layout.positions.push_back(begin + i);
      break;
    }
    case PlacementStrategy::per_anchor: {
      if (static_cast<int>(sorted.size()) != intervals)
        throw input_error("build_layout: per_anchor needs exactly one span per interval (" +
                          std::to_string(intervals) + " expected, " +
                          std::to_string(sorted.size()) + " given)");
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        const int begin = sorted[k].start + sorted[k].len;
        const int end = begin + tokens_per_interval;
        const int next_span = (k + 1 < sorted.size()) ? sorted[k + 1].start : seq_len;
        if (end > next_span)
          throw input_error("build_layout: no room for " + std::to_string(tokens_per_interval) +
                            " slots after span " + std::to_string(k));
        for (int i = begin; i < end; ++i) layout.positions.push_back(i);
      }
      break;
    }
  }
  return layout;
}

InjectResult scatter_inject(const EmbeddingSeq& seq, const PlaceholderLayout& layout,
                            const Mat& motion_tokens) {
  if (layout.seq_len != seq.seq_len())
    throw input_error("scatter_inject: layout length " + std::to_string(layout.seq_len) +
                      " does not match sequence length " + std::to_string(seq.seq_len()));
  if (motion_tokens.rows() != layout.slot_count())
    throw input_error("scatter_inject: " + std::to_string(motion_tokens.rows()) +
                      " motion-token rows for " + std::to_string(layout.slot_count()) +
                      " placeholder positions");
  if (layout.slot_count() > 0 && motion_tokens.cols() != seq.e.cols())
    throw input_error("scatter_inject: motion-token width differs from embedding width");
  for (std::size_t j = 0; j < layout.positions.size(); ++j) {
    const int p = layout.positions[j];
    if (p < 0 || p >= layout.seq_len) throw input_error("scatter_inject: position out of range");
    if (j > 0 && layout.positions[j - 1] >= p)
      throw input_error("scatter_inject: positions must be strictly increasing");
  }

  InjectResult out;
  out.seq.e = seq.e;
  out.provenance.assign(static_cast<std::size_t>(seq.seq_len()), -1);
  for (std::size_t j = 0; j < layout.positions.size(); ++j) {
    const int p = layout.positions[j];
    out.seq.e.row(p) = motion_tokens.row(static_cast<Eigen::Index>(j));
    out.provenance[static_cast<std::size_t>(p)] = static_cast<int>(j);
  }
  // Rows that came from the original sequence stay behind the stop-gradient;
  // only injected motion-token rows are trainable.
  out.seq.frozen.assign(static_cast<std::size_t>(seq.seq_len()), false);
  for (Eigen::Index i = 0; i < seq.seq_len(); ++i)
    out.seq.frozen[static_cast<std::size_t>(i)] = (out.provenance[static_cast<std::size_t>(i)] == -1);
  return out;
}

GradFlowReport grad_flow_check(const EmbeddingSeq& seq, const PlaceholderLayout& layout,
                               const Mat& motion_tokens,
                               const std::function<double(const Mat&)>& downstream_loss,
                               double eps) {
  GradFlowReport report;
  auto note = [&](double err, const std::string& what) {
    report.max_violation = std::max(report.max_violation, err);
    if (err > 1e-6) {
      report.ok = false;
      report.violations.push_back(what);
    }
  };

  const Mat injected = scatter_inject(seq, layout, motion_tokens).seq.e;
  std::vector<bool> is_placeholder(static_cast<std::size_t>(seq.seq_len()), false);
  for (const int p : layout.positions) is_placeholder[static_cast<std::size_t>(p)] = true;

  // Direct sensitivity of the loss to each row of the injected sequence.
  auto row_sensitivity = [&](const Mat& base, Eigen::Index row, Eigen::Index col) {
    Mat probe = base;
    probe(row, col) += eps;
    const double up = downstream_loss(probe);
    probe(row, col) = base(row, col) - eps;
    const double down = downstream_loss(probe);
    return (up - down) / (2 * eps);
  };

  for (Eigen::Index r = 0; r < seq.seq_len(); ++r) {
    for (Eigen::Index c = 0; c < seq.e.cols(); ++c) {
      // Sensitivity via perturbing the ORIGINAL sequence row.
      EmbeddingSeq pert = seq;
      pert.e(r, c) += eps;
      const double up = downstream_loss(scatter_inject(pert, layout, motion_tokens).seq.e);
      pert.e(r, c) = seq.e(r, c) - eps;
      const double down = downstream_loss(scatter_inject(pert, layout, motion_tokens).seq.e);
      const double via_e = (up - down) / (2 * eps);

      if (is_placeholder[static_cast<std::size_t>(r)]) {
        // Overwritten rows must be insensitive: the stop-gradient contract.
        note(std::abs(via_e), "frozen placeholder row " + std::to_string(r) +
                                  " leaked sensitivity " + std::to_string(via_e));
      } else {
        const double direct = row_sensitivity(injected, r, c);
        note(std::abs(via_e - direct), "pass-through row " + std::to_string(r) +
                                           " is not unit-routed");
      }
    }
  }

  // Motion-token rows must route identically to their target positions.
  for (Eigen::Index j = 0; j < motion_tokens.rows(); ++j) {
    const int p = layout.positions[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < motion_tokens.cols(); ++c) {
      Mat pert = motion_tokens;
      pert(j, c) += eps;
      const double up = downstream_loss(scatter_inject(seq, layout, pert).seq.e);
      pert(j, c) = motion_tokens(j, c) - eps;
      const double down = downstream_loss(scatter_inject(seq, layout, pert).seq.e);
      const double via_m = (up - down) / (2 * eps);
      const double direct = row_sensitivity(injected, p, c);
      note(std::abs(via_m - direct),
           "motion token " + std::to_string(j) + " is not identity-routed to row " + std::to_string(p));
    }
  }
  return report;
}

}  // namespace tristream
