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

#ifndef CONFPARSE_EVAL_EVAL_H_
#define CONFPARSE_EVAL_EVAL_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "confparse/core/tensor.h"
#include "confparse/eval/stats.h"
#include "confparse/seq2seq/model.h"
#include "confparse/seq2seq/vocab.h"

namespace confparse {

enum class F1Mode { kExact, kProductionSet };

struct F1Result {
  double value = 0.0;
  bool fell_back = false;  // MR could not be bracketed; exact match used
};

// Productions of a bracketed MR: a symbol followed by "(" rewrites to the
// symbols at the top level of its bracket, and ROOT rewrites to the top
// level of the whole MR. Returns nothing for unbalanced brackets.
std::optional<std::set<std::string>> extract_productions(std::span<const std::string> mr);

F1Result f1(std::span<const std::string> pred, std::span<const std::string> gold, F1Mode mode);

struct CoveragePoint {
  double threshold = 0.0;
  double coverage = 0.0;  // fraction of examples with score >= threshold
  double f1 = 0.0;        // mean F1 over those examples
  bool operator==(const CoveragePoint&) const = default;
};

// Thresholds are -inf followed by the j/points quantiles of the scores
// (j = 1..points-1); duplicates and empty subsets are dropped. Points are
// ordered by descending threshold, so the full-coverage point comes last.
std::vector<CoveragePoint> coverage_curve(std::span<const double> scores,
                                          std::span<const double> f1s, int points = 20);

// Pool-adjacent-violators fit of the F1 values, non-decreasing as coverage
// shrinks. Returns the curve with smoothed f1 in the same order.
std::vector<CoveragePoint> isotonic_smooth(std::span<const CoveragePoint> curve);

// Indices of the k largest scores; ties go to the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

struct Overlap {
  double value = 0.0;
  std::size_t k = 0;     // K actually used
  bool clamped = false;  // requested K exceeded the input length
};
Overlap overlap_at_k(std::span<const double> a, std::span<const double> b, std::size_t k);
// Overlap of two explicit top-K lists.
double list_overlap(std::span<const std::string> a, std::span<const std::string> b);

// Per-token proxy ground truth: sequence-probability variance when only that
// source token's embedding receives additive Gaussian noise.
std::vector<double> proxy_gold(const Seq2SeqModel& model, std::span<const TokenId> source,
                               std::span<const TokenId> target, double sigma = 0.05,
                               int passes = 30, std::uint64_t seed = 0);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Mat rho;
  std::vector<std::uint8_t> defined;  // row-major, same shape as rho
};
// Pairwise Spearman rho between columns.
CorrelationMatrix correlation_matrix(std::span<const std::string> names,
                                     std::span<const std::vector<double>> columns);

struct BootstrapResult {
  double delta = 0.0;    // rho(a) - rho(b) on the full sample
  double p_value = 1.0;  // one-sided, for delta > 0
  int resamples = 0;
};
// Resamples examples with replacement; p = (1 + #{delta* <= 0}) / (1 + B).
BootstrapResult bootstrap_rho_difference(std::span<const double> a, std::span<const double> b,
                                         std::span<const double> f1s, int resamples = 1000,
                                         std::uint64_t seed = 0);

nlohmann::json coverage_to_json(std::span<const CoveragePoint> curve);
std::vector<CoveragePoint> coverage_from_json(const nlohmann::json& j);
nlohmann::json correlation_to_json(const CorrelationMatrix& m);
CorrelationMatrix correlation_from_json(const nlohmann::json& j);

}  // namespace confparse

#endif  // CONFPARSE_EVAL_EVAL_H_
