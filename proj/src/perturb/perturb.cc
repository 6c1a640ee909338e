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

#include "confparse/perturb/perturb.h"

#include <cmath>

namespace confparse {
namespace {

void run_pass(const Seq2SeqModel& model, std::span<const TokenId> source,
              std::span<const TokenId> target, const PerturbationConfig& config, int pass,
              PerturbationRun& run) {
  TracedGraph graph(&model.params());
  NoiseInjector noise(config.noise, RngStream(config.seed).fork(static_cast<std::uint64_t>(pass)));
  const ForcedPass fp = teacher_forced(model, graph, source, target, &noise);
  const auto i = static_cast<std::size_t>(pass);
  run.sequence_probs[i] = std::exp(fp.logprob);
  for (std::size_t t = 0; t < fp.token_probs.size(); ++t) run.token_probs(i, t) = fp.token_probs[t];
}

PerturbationRun make_run(std::span<const TokenId> target, const PerturbationConfig& config) {
  require(config.passes >= 2, "perturbed_passes: need at least two passes");
  require(!target.empty(), "perturbed_passes: empty target");
  PerturbationRun run;
  run.config = config;
  run.sequence_probs.assign(static_cast<std::size_t>(config.passes), 0.0);
  run.token_probs = Mat(static_cast<std::size_t>(config.passes), target.size());
  return run;
}

}  // namespace

PerturbationConfig dropout_config(double rate, int passes, std::uint64_t seed, SiteSet sites) {
  PerturbationConfig c;
  c.passes = passes;
  c.seed = seed;
  c.noise.kind = NoiseKind::kDropout;
  c.noise.strength = rate;
  c.noise.sites = sites;
  return c;
}

PerturbationConfig gaussian_config(double sigma, NoiseMode mode, int passes, std::uint64_t seed,
                                   SiteSet sites) {
  PerturbationConfig c;
  c.passes = passes;
  c.seed = seed;
  c.noise.kind = NoiseKind::kGaussian;
  c.noise.strength = sigma;
  c.noise.mode = mode;
  c.noise.sites = sites;
  return c;
}

PerturbationRun perturbed_passes(const Seq2SeqModel& model, std::span<const TokenId> source,
                                 std::span<const TokenId> target, const PerturbationConfig& config) {
  PerturbationRun run = make_run(target, config);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < config.passes; ++i) run_pass(model, source, target, config, i, run);
  return run;
}

PerturbationRun perturbed_passes_serial(const Seq2SeqModel& model, std::span<const TokenId> source,
                                        std::span<const TokenId> target,
                                        const PerturbationConfig& config) {
  PerturbationRun run = make_run(target, config);
  for (int i = 0; i < config.passes; ++i) run_pass(model, source, target, config, i, run);
  return run;
}

PerturbationRun per_token_noise_passes(const Seq2SeqModel& model, std::span<const TokenId> source,
                                       std::span<const TokenId> target, int position, double sigma,
                                       int passes, std::uint64_t seed) {
  require(position >= 0 && static_cast<std::size_t>(position) < source.size(),
          "per_token_noise_passes: token index out of range");
  PerturbationConfig c = gaussian_config(sigma, NoiseMode::kAdditive, passes, seed,
                                         static_cast<unsigned>(Site::kSourceTokens));
  c.noise.only_source_position = position;
  return perturbed_passes(model, source, target, c);
}

}  // namespace confparse
