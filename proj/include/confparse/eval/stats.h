// Copyright 2026 The confparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFPARSE_EVAL_STATS_H_
#define CONFPARSE_EVAL_STATS_H_

#include <span>
#include <vector>

namespace confparse {

// 1-based ranks; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation; `defined` is false when either side has zero variance.
struct Correlation {
  double rho = 0.0;
  bool defined = false;
};
Correlation pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks. Requires |x| = |y| >= 3.
Correlation spearman(std::span<const double> x, std::span<const double> y);

}  // namespace confparse

#endif  // CONFPARSE_EVAL_STATS_H_
