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

#include "confparse/seq2seq/vocab.h"

#include <map>

#include "confparse/core/tensor.h"

namespace confparse {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

Vocab::Vocab() {
  insert("<pad>");
  insert("<s>");
  insert("<unk>");
  insert("</s>");
}

void Vocab::insert(std::string token) {
  require(!ids_.contains(token), "Vocab: duplicate token '" + token + "'");
  ids_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const Tokens> sequences, int min_count) {
  std::map<std::string, int> counts;
  for (const Tokens& seq : sequences)
    for (const std::string& t : seq) ++counts[t];
  Vocab v;
  for (const auto& [token, n] : counts) {
    if (n >= min_count && !v.ids_.contains(token)) v.insert(token);
  }
  return v;
}

Vocab Vocab::from_tokens(std::span<const std::string> tokens) {
  Vocab v;
  for (const std::string& t : tokens) v.insert(t);
  return v;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  require(id >= 0 && static_cast<std::size_t>(id) < tokens_.size(), "Vocab: id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it != ids_.end() && it->second >= kReserved;
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocab::entries() const {
  return {tokens_.begin() + kReserved, tokens_.end()};
}

}  // namespace confparse
