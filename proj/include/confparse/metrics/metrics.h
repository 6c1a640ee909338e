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

#ifndef CONFPARSE_METRICS_METRICS_H_
#define CONFPARSE_METRICS_METRICS_H_

#include <span>
#include <vector>

#include "confparse/perturb/perturb.h"
#include "confparse/seq2seq/decode.h"

namespace confparse {

// Population variance (divides by n).
double population_variance(std::span<const double> values);

// Variance of p(a|q) across perturbation passes.
double seq_variance(const PerturbationRun& run);

struct TokenUncertainty {
  std::vector<double> per_token;  // u_{a_t}
  double avg = 0.0;
  double max = 0.0;
};
// Per-step variance of p(a_t | a_<t, q) across passes.
TokenUncertainty token_uncertainty(const PerturbationRun& run);

struct PosteriorMetrics {
  double log_posterior = 0.0;    // log p(a|q)
  double min_token_prob = 1.0;   // min_t p(a_t | a_<t, q)
  double avg_neg_logprob = 0.0;  // -(1/|a|) sum_t log p(a_t | a_<t, q)
};
PosteriorMetrics posterior_metrics(const Prediction& pred);

// Tokens of `source` that are not in `vocab`.
std::size_t count_unk(std::span<const std::string> source, const Vocab& vocab);

struct TopKVariance {
  double value = 0.0;
  std::size_t k_eff = 0;
  bool missing = false;  // fewer than two candidates
};
// Variance of the candidates' sequence probabilities (not log-probabilities).
TopKVariance topk_variance(std::span<const Prediction> candidates, std::size_t k = 10);

double entropy(std::span<const double> distribution);

struct TokenEntropies {
  std::vector<double> per_step;
  double avg = 0.0;
  double max = 0.0;
};
// Exact entropy of each step's output distribution along the prediction.
TokenEntropies token_entropies(const Prediction& pred);

struct EntropyEstimate {
  double value = 0.0;      // mean of -log p(a'|q) over samples
  double std_error = 0.0;  // of that mean
  std::size_t samples = 0;
};
// Monte Carlo estimate of H[a|q] from ancestral samples.
EntropyEstimate decoding_entropy(const Seq2SeqModel& model, std::span<const TokenId> source,
                                 std::size_t samples, RngStream& rng, std::size_t max_length = 0);

}  // namespace confparse

#endif  // CONFPARSE_METRICS_METRICS_H_
