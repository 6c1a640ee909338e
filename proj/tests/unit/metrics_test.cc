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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "confparse/metrics/features.h"
#include "confparse/metrics/metrics.h"
#include "confparse/metrics/ngram_lm.h"
#include "confparse/perturb/perturb.h"
#include "test_models.h"

namespace confparse {
namespace {

PerturbationRun run_from(std::vector<std::vector<double>> token_rows) {
  PerturbationRun r;
  r.config.passes = static_cast<int>(token_rows.size());
  r.token_probs = Mat(token_rows.size(), token_rows.front().size());
  for (std::size_t i = 0; i < token_rows.size(); ++i) {
    double prod = 1.0;
    for (std::size_t t = 0; t < token_rows[i].size(); ++t) {
      r.token_probs(i, t) = token_rows[i][t];
      prod *= token_rows[i][t];
    }
    r.sequence_probs.push_back(prod);
  }
  return r;
}

TEST(Variance, HandValues) {
  EXPECT_EQ(population_variance(std::vector<double>{0.3, 0.3, 0.3}), 0.0);
  EXPECT_NEAR(population_variance(std::vector<double>{0.2, 0.4}), 0.01, 1e-15);
  EXPECT_NEAR(population_variance(std::vector<double>{0.4, 0.2}), 0.01, 1e-15);
}

TEST(Variance, PermutationInvariant) {
  std::vector<double> v = {0.1, 0.7, 0.35, 0.9, 0.02};
  const double base = population_variance(v);
  std::sort(v.begin(), v.end());
  do {
    EXPECT_NEAR(population_variance(v), base, 1e-15);
  } while (std::next_permutation(v.begin(), v.end()));
}

TEST(SeqVariance, FromPasses) {
  EXPECT_NEAR(seq_variance(run_from({{0.2}, {0.4}})), 0.01, 1e-15);
  EXPECT_EQ(seq_variance(run_from({{0.5, 0.5}, {0.5, 0.5}})), 0.0);
}

TEST(TokenUncertainty, HandValues) {
  const TokenUncertainty u = token_uncertainty(run_from({{0.5, 0.9}, {0.7, 0.9}}));
  ASSERT_EQ(u.per_token.size(), 2u);
  EXPECT_NEAR(u.per_token[0], 0.01, 1e-15);
  EXPECT_EQ(u.per_token[1], 0.0);
  EXPECT_NEAR(u.avg, 0.005, 1e-15);
  EXPECT_NEAR(u.max, 0.01, 1e-15);
}

TEST(Posterior, SingleCertainToken) {
  Prediction p;
  p.tokens = {Vocab::kEos};
  p.token_probs = {1.0};
  const PosteriorMetrics m = posterior_metrics(p);
  EXPECT_EQ(m.log_posterior, 0.0);
  EXPECT_EQ(m.min_token_prob, 1.0);
  EXPECT_EQ(m.avg_neg_logprob, 0.0);
}

TEST(Posterior, UniformModel) {
  Seq2SeqModel m({3, 3, 1}, testing::numbered_vocab("s", 3), testing::numbered_vocab("t", 4), 1);
  m.params().at(m.output_weight()).fill(0.0);
  const std::vector<TokenId> q = {4, 5};
  const Prediction p = score_target(m, q, std::vector<TokenId>{4, 5, 6, Vocab::kEos});
  const PosteriorMetrics pm = posterior_metrics(p);
  const double lnv = std::log(static_cast<double>(m.output_classes()));
  EXPECT_NEAR(pm.avg_neg_logprob, lnv, 1e-12);
  EXPECT_NEAR(pm.log_posterior, -4 * lnv, 1e-12);
  EXPECT_NEAR(pm.min_token_prob, 1.0 / m.output_classes(), 1e-15);
}

TEST(UnkCount, Definitional) {
  const Vocab v = Vocab::from_tokens(std::vector<std::string>{"a", "b", "c"});
  EXPECT_EQ(count_unk(Tokens{"a", "b", "c"}, v), 0u);
  Tokens q = {"a", "x", "b", "y", "c"};
  EXPECT_EQ(count_unk(q, v), 2u);
  std::reverse(q.begin(), q.end());
  EXPECT_EQ(count_unk(q, v), 2u);
}

std::vector<Prediction> with_probs(std::vector<double> probs) {
  std::vector<Prediction> out;
  for (double p : probs) {
    Prediction pr;
    pr.logprob = std::log(p);
    out.push_back(pr);
  }
  return out;
}

TEST(TopK, HandValuesAndMissing) {
  EXPECT_NEAR(topk_variance(with_probs({0.6, 0.2})).value, 0.04, 1e-15);
  EXPECT_EQ(topk_variance(with_probs({0.3, 0.3, 0.3})).value, 0.0);
  const TopKVariance one = topk_variance(with_probs({0.9}));
  EXPECT_TRUE(one.missing);
  EXPECT_EQ(one.value, 0.0);
  const TopKVariance cut = topk_variance(with_probs({0.6, 0.2, 0.1}), 2);
  EXPECT_EQ(cut.k_eff, 2u);
  EXPECT_NEAR(cut.value, 0.04, 1e-15);
}

TEST(Entropy, ExactValues) {
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-15);
  Prediction p;
  p.distributions = {{0.5, 0.5}, {1.0, 0.0}};
  const TokenEntropies te = token_entropies(p);
  EXPECT_NEAR(te.avg, std::log(2.0) / 2, 1e-15);
  EXPECT_NEAR(te.max, std::log(2.0), 1e-15);
}

TEST(DecodingEntropy, DeterministicDecoderIsExactlyZero) {
  const Seq2SeqModel m = testing::certain_model(8, 1);
  RngStream rng(1);
  const EntropyEstimate e = decoding_entropy(m, std::vector<TokenId>{4, 5}, 50, rng);
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(DecodingEntropy, SingleStepUniformOverTwo) {
  // No target words: the only output classes are UNK and EOS.
  Seq2SeqModel m({3, 3, 1}, testing::numbered_vocab("s", 2), Vocab(), 1);
  m.params().at(m.output_weight()).fill(0.0);
  RngStream rng(2);
  const EntropyEstimate e = decoding_entropy(m, std::vector<TokenId>{4}, 500, rng, 1);
  EXPECT_NEAR(e.value, std::log(2.0), 3 * e.std_error + 1e-12);
}

TEST(NGramLM, ConditionalsSumToOne) {
  const std::vector<Tokens> corpus = {{"a", "b", "c"}, {"a", "b", "b"}, {"c", "a"}, {"b"}};
  for (Smoothing sm : {Smoothing::kWittenBell, Smoothing::kLaplace}) {
    const NGramLM lm = NGramLM::fit(corpus, 3, sm);
    const std::vector<Tokens> histories = {{}, {"a"}, {"a", "b"}, {"zz", "q"}, {"<s>", "<s>"}, {"c", "c"}};
    for (const Tokens& h : histories) {
      double total = 0.0;
      for (const std::string& w : lm.vocabulary()) total += lm.prob(h, w);
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(NGramLM, NormalizedAndSerialized) {
  const std::vector<Tokens> corpus = {{"turn", "on", "light"}, {"turn", "off", "light"}};
  const NGramLM lm = NGramLM::fit(corpus);
  const Tokens q = {"turn", "on", "light"};
  EXPECT_NEAR(lm.normalized_logprob(q), lm.logprob(q) / 3.0, 1e-15);
  EXPECT_GT(lm.logprob(q), lm.logprob(Tokens{"light", "on", "turn"}));
  EXPECT_THROW(lm.normalized_logprob(Tokens{}), Error);
  EXPECT_EQ(NGramLM::from_json(lm.to_json()).logprob(q), lm.logprob(q));
}

TEST(Features, CertainPredictionHasZeroUncertainty) {
  const Seq2SeqModel m = testing::certain_model(8, 2);
  const std::vector<TokenId> q = {4, 5};
  const Tokens words = {"s0", "s1"};
  const Prediction pred = greedy_decode(m, q);
  ASSERT_EQ(pred.tokens, std::vector<TokenId>{Vocab::kEos});
  const auto drop = perturbed_passes(m, q, pred.tokens, dropout_config(0.1, 30, 1));
  const auto add = perturbed_passes(m, q, pred.tokens, gaussian_config(0.05, NoiseMode::kAdditive, 30, 2));
  const auto mul =
      perturbed_passes(m, q, pred.tokens, gaussian_config(0.05, NoiseMode::kMultiplicative, 30, 3));
  const NGramLM lm = NGramLM::fit(std::vector<Tokens>{words});
  RngStream rng(4);
  MetricInputs in;
  in.source = words;
  in.prediction = &pred;
  in.dropout = &drop;
  in.noise_additive = &add;
  in.noise_multiplicative = &mul;
  in.lm = &lm;
  in.source_vocab = &m.source_vocab();
  in.sequence_entropy = decoding_entropy(m, q, 30, rng);
  const FeatureVector f = assemble_features(in);
  for (const char* name : {"dropout_seq_var", "dropout_tok_avg", "dropout_tok_max", "noise_add_seq_var",
                           "noise_add_tok_max", "noise_mul_seq_var", "noise_mul_tok_max", "log_posterior",
                           "avg_neg_logprob", "unk_count", "seq_entropy_mc", "tok_entropy_avg",
                           "tok_entropy_max"}) {
    EXPECT_EQ(f.get(name), 0.0) << name;
  }
  EXPECT_EQ(f.get("min_token_prob"), 1.0);
  // No k-best list was supplied.
  EXPECT_TRUE(f.missing[confidence_schema().index("topk_var")]);
}

TEST(Features, SchemaAndJsonRoundTrip) {
  const FeatureSchema& s = confidence_schema();
  EXPECT_EQ(s.size(), 18u);
  EXPECT_EQ(s.names.size(), s.groups.size());
  FeatureRow row;
  row.id = "dev-1";
  row.target = 0.5;
  row.features.values.assign(s.size(), 0.1);
  row.features.missing.assign(s.size(), 0);
  row.features.missing[3] = 1;
  const std::vector<FeatureRow> rows = {row};
  EXPECT_EQ(features_from_json(features_to_json(rows)), rows);
  auto j = features_to_json(rows);
  j["schema"]["hash"] = "0";
  EXPECT_THROW(features_from_json(j), Error);
}

}  // namespace
}  // namespace confparse
