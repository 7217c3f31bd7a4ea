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

#include "tristream/stats.hpp"

#include <algorithm>
#include <cmath>

namespace tristream {

namespace {

double z_for_confidence(double confidence) {
  if (std::abs(confidence - 0.90) < 1e-9) return 1.644854;
  if (std::abs(confidence - 0.95) < 1e-9) return 1.959964;
  if (std::abs(confidence - 0.99) < 1e-9) return 2.575829;
  throw input_error("wilson_interval: confidence must be 0.90, 0.95, or 0.99");
}

}  // namespace

std::pair<double, double> wilson_interval(const BinomialResult& r) {
  if (r.total < 1) throw input_error("wilson_interval: total must be >= 1");
  if (r.correct < 0 || r.correct > r.total)
    throw input_error("wilson_interval: correct must lie in [0, total]");

  const double z = z_for_confidence(r.confidence);
  const double n = static_cast<double>(r.total);
  const double p = static_cast<double>(r.correct) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = std::clamp(center - half, 0.0, 1.0);
  const double hi = std::clamp(center + half, 0.0, 1.0);
  return {std::min(lo, p), std::max(hi, p)};
}

double accuracy(std::int64_t correct, std::int64_t total) {
  if (total < 1) throw input_error("accuracy: total must be >= 1");
  return std::round(10000.0 * static_cast<double>(correct) / static_cast<double>(total)) / 100.0;
}

}  // namespace tristream
