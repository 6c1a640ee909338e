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

#ifndef CONFPARSE_METRICS_NGRAM_LM_H_
#define CONFPARSE_METRICS_NGRAM_LM_H_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "confparse/seq2seq/vocab.h"

namespace confparse {

enum class Smoothing { kWittenBell, kLaplace };

// Word n-gram model of the training utterances, used for p(q | D).
// Interpolated Witten-Bell backs off to a uniform distribution over the
// vocabulary (seen words, <unk>, and </s> when sentence ends are modelled),
// so every conditional distribution sums to one.
class NGramLM {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";

  static NGramLM fit(std::span<const Tokens> corpus, int order = 3,
                     Smoothing smoothing = Smoothing::kWittenBell, bool sentence_end = true);

  int order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }
  // Predictable words: seen words, <unk>, and </s> if enabled.
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  // p(word | history); only the last order-1 history tokens matter. Words
  // outside the vocabulary are scored as <unk>.
  double prob(std::span<const std::string> history, const std::string& word) const;
  // Total natural-log probability of the sentence (plus </s>).
  double logprob(std::span<const std::string> sentence) const;
  // logprob / |q|. Throws on an empty query.
  double normalized_logprob(std::span<const std::string> sentence) const;

  nlohmann::json to_json() const;
  static NGramLM from_json(const nlohmann::json& j);

 private:
  struct Context {
    double total = 0;  // c(h)
    double types = 0;  // distinct successors of h
    std::unordered_map<std::string, double> counts;
  };

  std::string map_word(const std::string& w) const;
  double prob_at(std::span<const std::string> history, const std::string& word, int n) const;
  static std::string key(std::span<const std::string> history);

  int order_ = 3;
  Smoothing smoothing_ = Smoothing::kWittenBell;
  bool sentence_end_ = true;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, bool> known_;
  // contexts_[m] holds histories of length m.
  std::vector<std::unordered_map<std::string, Context>> contexts_;
};

}  // namespace confparse

#endif  // CONFPARSE_METRICS_NGRAM_LM_H_
