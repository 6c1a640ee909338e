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

#include <cmath>

#include <gtest/gtest.h>

#include "confparse/metrics/metrics.h"
#include "confparse/perturb/perturb.h"
#include "confparse/seq2seq/decode.h"
#include "test_models.h"

namespace confparse {
namespace {

using testing::peaked_attention_model;
using testing::random_model;

const std::vector<TokenId> kSource = {4, 6, 5, 7};
const std::vector<TokenId> kTarget = {5, 4, 6, Vocab::kEos};

void expect_all_rows_clean(const Seq2SeqModel& m, const PerturbationRun& run) {
  const Prediction clean = score_target(m, kSource, kTarget);
  ASSERT_EQ(run.token_probs.rows(), static_cast<std::size_t>(run.config.passes));
  ASSERT_EQ(run.token_probs.cols(), kTarget.size());
  for (std::size_t i = 0; i < run.token_probs.rows(); ++i) {
    for (std::size_t t = 0; t < kTarget.size(); ++t) {
      EXPECT_EQ(run.token_probs(i, t), clean.token_probs[t]);
    }
    EXPECT_NEAR(std::log(run.sequence_probs[i]), clean.logprob, 1e-12);
  }
}

TEST(Perturb, ZeroDropoutReproducesCleanPass) {
  const Seq2SeqModel m = random_model(5, 5, 6, 1);
  expect_all_rows_clean(m, perturbed_passes(m, kSource, kTarget, dropout_config(0.0, 5, 3)));
}

TEST(Perturb, ZeroSigmaReproducesCleanPass) {
  const Seq2SeqModel m = random_model(5, 5, 6, 2);
  for (NoiseMode mode : {NoiseMode::kAdditive, NoiseMode::kMultiplicative}) {
    expect_all_rows_clean(m, perturbed_passes(m, kSource, kTarget, gaussian_config(0.0, mode, 4, 3)));
  }
}

TEST(Perturb, ProbabilitiesInUnitInterval) {
  const Seq2SeqModel m = random_model(5, 5, 6, 3);
  const PerturbationRun run = perturbed_passes(m, kSource, kTarget, dropout_config(0.3, 10, 1));
  for (double p : run.token_probs.flat()) {
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  for (std::size_t i = 0; i < run.sequence_probs.size(); ++i) {
    double prod = 1.0;
    for (std::size_t t = 0; t < kTarget.size(); ++t) prod *= run.token_probs(i, t);
    EXPECT_NEAR(run.sequence_probs[i], prod, 1e-14);
  }
}

TEST(Perturb, FixedSeedIsBitReproducible) {
  const Seq2SeqModel m = random_model(5, 5, 6, 4);
  const auto cfg = dropout_config(0.1, 3, 77);
  const PerturbationRun a = perturbed_passes(m, kSource, kTarget, cfg);
  const PerturbationRun b = perturbed_passes(m, kSource, kTarget, cfg);
  EXPECT_EQ(a.token_probs, b.token_probs);
  EXPECT_EQ(a.sequence_probs, b.sequence_probs);
  const PerturbationRun c = perturbed_passes(m, kSource, kTarget, dropout_config(0.1, 3, 78));
  EXPECT_NE(a.token_probs, c.token_probs);
}

TEST(Perturb, ParallelMatchesSerial) {
  const Seq2SeqModel m = random_model(5, 5, 8, 5);
  for (const auto& cfg : {dropout_config(0.1, 30, 9), gaussian_config(0.05, NoiseMode::kAdditive, 30, 9),
                          gaussian_config(0.05, NoiseMode::kMultiplicative, 30, 9)}) {
    const PerturbationRun par = perturbed_passes(m, kSource, kTarget, cfg);
    const PerturbationRun ser = perturbed_passes_serial(m, kSource, kTarget, cfg);
    EXPECT_EQ(par.token_probs, ser.token_probs);
    EXPECT_EQ(par.sequence_probs, ser.sequence_probs);
  }
}

TEST(Perturb, SiteSelectionMatters) {
  const Seq2SeqModel m = random_model(5, 5, 6, 6);
  const auto all = perturbed_passes(m, kSource, kTarget, dropout_config(0.2, 5, 1));
  const auto src_only =
      perturbed_passes(m, kSource, kTarget, dropout_config(0.2, 5, 1, static_cast<unsigned>(Site::kSourceTokens)));
  EXPECT_NE(all.token_probs, src_only.token_probs);
  EXPECT_GT(seq_variance(src_only), 0.0);
}

TEST(PerTokenNoise, ZeroSigmaGivesZeroVariance) {
  const Seq2SeqModel m = random_model(5, 5, 6, 7);
  const auto run = per_token_noise_passes(m, kSource, kTarget, 1, 0.0, 10, 3);
  EXPECT_EQ(token_uncertainty(run).max, 0.0);
  EXPECT_THROW(per_token_noise_passes(m, kSource, kTarget, 4, 0.05, 10, 3), Error);
}

TEST(PerTokenNoise, IgnoredTokenHasNearZeroVariance) {
  const Seq2SeqModel m = peaked_attention_model(32, 8);
  const std::vector<TokenId> q = {4, 5};
  const std::vector<TokenId> a = {6, 4, Vocab::kEos};
  const Prediction clean = score_target(m, q, a);
  EXPECT_LT(clean.attention(0, 1), 1e-12);
  const auto ignored = per_token_noise_passes(m, q, a, 1, 0.05, 30, 4);
  EXPECT_LT(token_uncertainty(ignored).max, 1e-8);
  EXPECT_LT(seq_variance(ignored), 1e-8);
  // The attended token does move the output.
  const auto attended = per_token_noise_passes(m, q, a, 0, 0.05, 30, 4);
  EXPECT_GT(token_uncertainty(attended).max, 1e3 * token_uncertainty(ignored).max);
}

}  // namespace
}  // namespace confparse
