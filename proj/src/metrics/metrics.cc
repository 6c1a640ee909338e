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

#include "confparse/metrics/metrics.h"

#include <algorithm>
#include <cmath>

namespace confparse {

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  // Shifting by the first value makes identical inputs give exactly 0.
  const double pivot = values[0];
  double mean = 0.0;
  for (double v : values) mean += v - pivot;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - pivot - mean) * (v - pivot - mean);
  return ss / static_cast<double>(values.size());
}

double seq_variance(const PerturbationRun& run) {
  require(run.sequence_probs.size() >= 2, "seq_variance: need at least two passes");
  return population_variance(run.sequence_probs);
}

TokenUncertainty token_uncertainty(const PerturbationRun& run) {
  const Mat& m = run.token_probs;
  require(m.rows() >= 2, "token_uncertainty: need at least two passes");
  TokenUncertainty out;
  std::vector<double> column(m.rows());
  for (std::size_t t = 0; t < m.cols(); ++t) {
    for (std::size_t i = 0; i < m.rows(); ++i) column[i] = m(i, t);
    out.per_token.push_back(population_variance(column));
  }
  if (!out.per_token.empty()) {
    for (double u : out.per_token) out.avg += u;
    out.avg /= static_cast<double>(out.per_token.size());
    out.max = *std::max_element(out.per_token.begin(), out.per_token.end());
  }
  return out;
}

PosteriorMetrics posterior_metrics(const Prediction& pred) {
  require(!pred.token_probs.empty(), "posterior_metrics: empty prediction");
  PosteriorMetrics m;
  double total = 0.0;
  for (double p : pred.token_probs) {
    total += std::log(p);
    m.min_token_prob = std::min(m.min_token_prob, p);
  }
  m.log_posterior = total;
  m.avg_neg_logprob = -total / static_cast<double>(pred.token_probs.size());
  return m;
}

std::size_t count_unk(std::span<const std::string> source, const Vocab& vocab) {
  return static_cast<std::size_t>(std::count_if(
      source.begin(), source.end(), [&](const std::string& t) { return !vocab.contains(t); }));
}

TopKVariance topk_variance(std::span<const Prediction> candidates, std::size_t k) {
  TopKVariance out;
  out.k_eff = std::min(k, candidates.size());
  if (out.k_eff < 2) {
    out.missing = true;
    return out;
  }
  std::vector<double> probs;
  for (std::size_t i = 0; i < out.k_eff; ++i) probs.push_back(std::exp(candidates[i].logprob));
  out.value = population_variance(probs);
  return out;
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

TokenEntropies token_entropies(const Prediction& pred) {
  TokenEntropies out;
  for (const Vec& d : pred.distributions) out.per_step.push_back(entropy(d));
  if (!out.per_step.empty()) {
    for (double h : out.per_step) out.avg += h;
    out.avg /= static_cast<double>(out.per_step.size());
    out.max = *std::max_element(out.per_step.begin(), out.per_step.end());
  }
  return out;
}

EntropyEstimate decoding_entropy(const Seq2SeqModel& model, std::span<const TokenId> source,
                                 std::size_t samples, RngStream& rng, std::size_t max_length) {
  require(samples >= 1, "decoding_entropy: need at least one sample");
  std::vector<double> nll;
  nll.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    nll.push_back(-sample_sequence(model, source, rng, max_length).logprob);
  }
  EntropyEstimate e;
  e.samples = samples;
  for (double v : nll) e.value += v;
  e.value /= static_cast<double>(samples);
  // -log p is exactly 0 for a deterministic decoder; keep the sign clean.
  e.value = std::max(0.0, e.value);
  e.std_error = std::sqrt(population_variance(nll) / static_cast<double>(samples));
  return e;
}

}  // namespace confparse
