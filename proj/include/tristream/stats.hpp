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
#include <utility>

#include "tristream/common.hpp"

namespace tristream {

struct BinomialResult {
  std::int64_t correct = 0;
  std::int64_t total = 0;
  double confidence = 0.95;  // one of 0.90, 0.95, 0.99
};

/// Wilson score interval. The z quantile comes from a fixed lookup
/// (1.644854 / 1.959964 / 2.575829) rather than an erf implementation, so
/// results are bit-reproducible. Bounds are clamped to [0, 1] and always
/// contain the point estimate.
std::pair<double, double> wilson_interval(const BinomialResult& r);

/// 100 * correct / total, rounded to two decimals.
double accuracy(std::int64_t correct, std::int64_t total);

}  // namespace tristream
