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

#ifndef CONFPARSE_CORPUS_CORPUS_H_
#define CONFPARSE_CORPUS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "confparse/seq2seq/vocab.h"

namespace confparse {

// One way to fill a slot: the words in the utterance and the MR token(s)
// they denote. More than one MR value makes the surface form ambiguous.
struct SlotValue {
  std::string surface;
  std::vector<std::string> values;
};

// Utterance variants and MR pattern for a trigger or an action. Patterns
// use {slot} placeholders; the MR pattern may splice a slot into a symbol.
struct Template {
  std::string name;
  std::vector<std::string> utterances;
  std::string mr;
};

struct GrammarSpec {
  int version = 1;
  std::vector<Template> triggers;
  std::vector<Template> actions;
  // Composition of a trigger phrase and an action phrase.
  std::vector<std::string> patterns;
  std::map<std::string, std::vector<SlotValue>> slots;
  // Names for the {person} slot: frequent ones, a large pool of names used
  // once each in train, and names never seen in train.
  std::vector<std::string> common_names;
  std::vector<std::string> rare_names;
  std::vector<std::string> unseen_names;

  double ambiguity_rate = 0.1;
  double noise_rate = 0.05;
  double oov_rate = 0.1;
  std::uint64_t seed = 1;

  // Throws on templates naming unknown slots, empty inventories or rates
  // outside [0, 1].
  void validate() const;
};

GrammarSpec default_grammar();

struct CorpusSizes {
  std::size_t train = 2000;
  std::size_t dev = 300;
  std::size_t test = 300;
};

struct CorpusExample {
  Example example;
  bool ambiguous = false;  // utterance admits more than one MR
  bool noisy = false;      // gold MR was corrupted
  bool oov = false;        // contains a name absent from frequent use
  bool operator==(const CorpusExample&) const = default;
};

struct CorpusSplit {
  std::vector<CorpusExample> train;
  std::vector<CorpusExample> dev;
  std::vector<CorpusExample> test;
  nlohmann::json manifest;
};

// Deterministic under spec.seed; utterances are unique across all splits.
CorpusSplit generate_corpus(const GrammarSpec& spec, const CorpusSizes& sizes);

std::vector<Example> examples_of(const std::vector<CorpusExample>& split);

// "utterance<TAB>mr" per line.
std::string format_tsv(const std::vector<CorpusExample>& split);
// Accepts LF or CRLF; `name` is used in diagnostics.
std::vector<Example> parse_tsv(std::string_view text, const std::string& name);

// Writes train.tsv, dev.tsv, test.tsv and manifest.json into `dir`.
void save_corpus(const CorpusSplit& corpus, const std::filesystem::path& dir);
// Restores examples and re-applies the tags recorded in the manifest.
CorpusSplit load_corpus(const std::filesystem::path& dir);

}  // namespace confparse

#endif  // CONFPARSE_CORPUS_CORPUS_H_
