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

#ifndef CONFPARSE_SEQ2SEQ_DECODE_H_
#define CONFPARSE_SEQ2SEQ_DECODE_H_

#include <span>
#include <vector>

#include "confparse/seq2seq/model.h"

namespace confparse {

struct Prediction {
  std::vector<TokenId> tokens;      // includes the final EOS when terminated
  std::vector<Vec> distributions;   // per step, over output classes
  std::vector<double> token_probs;  // p(a_t | a_<t, q) of the chosen tokens
  Mat attention;                    // |a| x |q|
  double logprob = 0.0;             // sum of log token_probs
  int rank = 0;
  bool terminated = false;          // ended with EOS rather than the length cap
};

// 2|q| + 10.
std::size_t default_max_length(std::size_t source_length);

Prediction greedy_decode(const Seq2SeqModel& model, std::span<const TokenId> source,
                         std::size_t max_length = 0);

// Hypotheses are ranked by total log-probability (no length normalisation).
// Returns up to `beam_size` completed hypotheses, best first. A max_length of
// 0 selects default_max_length.
std::vector<Prediction> beam_search(const Seq2SeqModel& model, std::span<const TokenId> source,
                                    std::size_t beam_size, std::size_t max_length = 0);

// Ancestral sample from p(a | q).
Prediction sample_sequence(const Seq2SeqModel& model, std::span<const TokenId> source,
                           RngStream& rng, std::size_t max_length = 0);

// Prediction record for a given target (teacher-forced, no perturbation).
Prediction score_target(const Seq2SeqModel& model, std::span<const TokenId> source,
                        std::span<const TokenId> target);

// Output tokens as strings (EOS dropped); UNK at step t is replaced by the
// source token with the highest attention weight (lowest index on ties)
// when `replace` is set.
Tokens output_tokens(const Prediction& pred, const Vocab& target, std::span<const std::string> source,
                     bool replace);
Tokens replace_unk(const Prediction& pred, const Vocab& target, std::span<const std::string> source);

}  // namespace confparse

#endif  // CONFPARSE_SEQ2SEQ_DECODE_H_
