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

#ifndef CONFPARSE_PERTURB_PERTURB_H_
#define CONFPARSE_PERTURB_PERTURB_H_

#include <cstdint>
#include <span>
#include <vector>

#include "confparse/seq2seq/model.h"

namespace confparse {

struct PerturbationConfig {
  int passes = 30;
  NoiseSpec noise;
  std::uint64_t seed = 0;
};

PerturbationConfig dropout_config(double rate, int passes, std::uint64_t seed,
                                  SiteSet sites = kAllSites);
PerturbationConfig gaussian_config(double sigma, NoiseMode mode, int passes, std::uint64_t seed,
                                   SiteSet sites = kAllSites);

// Result of F teacher-forced passes over a fixed (q, a). Row i of
// token_probs holds pass i's p(a_t | a_<t, q) for every step t.
struct PerturbationRun {
  PerturbationConfig config;
  std::vector<double> sequence_probs;  // p(a | q) per pass
  Mat token_probs;                     // passes x |a|
};

// Pass i draws its noise from RngStream(config.seed).fork(i), so results are
// identical whatever order the passes run in. Passes run in parallel.
PerturbationRun perturbed_passes(const Seq2SeqModel& model, std::span<const TokenId> source,
                                 std::span<const TokenId> target, const PerturbationConfig& config);
// Same contract, one pass after another.
PerturbationRun perturbed_passes_serial(const Seq2SeqModel& model, std::span<const TokenId> source,
                                        std::span<const TokenId> target,
                                        const PerturbationConfig& config);

// Additive Gaussian noise on the embedding of source token `position`
// (0-based) only.
PerturbationRun per_token_noise_passes(const Seq2SeqModel& model, std::span<const TokenId> source,
                                       std::span<const TokenId> target, int position, double sigma,
                                       int passes, std::uint64_t seed);

}  // namespace confparse

#endif  // CONFPARSE_PERTURB_PERTURB_H_
