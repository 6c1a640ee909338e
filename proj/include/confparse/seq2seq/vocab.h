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

#ifndef CONFPARSE_SEQ2SEQ_VOCAB_H_
#define CONFPARSE_SEQ2SEQ_VOCAB_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace confparse {

using TokenId = std::int32_t;
using Tokens = std::vector<std::string>;

// An utterance and its meaning representation.
struct Example {
  Tokens source;
  Tokens target;
  bool operator==(const Example&) const = default;
};

// Whitespace tokenisation (runs of spaces/tabs collapse).
Tokens tokenize(std::string_view text);
std::string join(std::span<const std::string> tokens, std::string_view sep = " ");

// Token <-> id map. Ids 0..3 are reserved; only ids >= kFirstOutput can be
// emitted by the decoder, so output class c corresponds to id c + kFirstOutput.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr TokenId kEos = 3;
  static constexpr TokenId kFirstOutput = kUnk;
  static constexpr TokenId kReserved = 4;

  Vocab();
  // Keeps tokens seen at least `min_count` times, in lexicographic order.
  static Vocab build(std::span<const Tokens> sequences, int min_count);
  // `tokens` lists the non-reserved entries in id order.
  static Vocab from_tokens(std::span<const std::string> tokens);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  // Non-reserved tokens in id order (what from_tokens expects).
  std::vector<std::string> entries() const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void insert(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace confparse

#endif  // CONFPARSE_SEQ2SEQ_VOCAB_H_
