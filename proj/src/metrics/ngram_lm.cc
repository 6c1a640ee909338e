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

#include "confparse/metrics/ngram_lm.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "confparse/core/tensor.h"

namespace confparse {

std::string NGramLM::key(std::span<const std::string> history) {
  std::string k;
  for (const std::string& h : history) {
    k += h;
    k += '\x1f';
  }
  return k;
}

std::string NGramLM::map_word(const std::string& w) const {
  if (w == kBos) return w;
  return known_.contains(w) ? w : std::string(kUnk);
}

NGramLM NGramLM::fit(std::span<const Tokens> corpus, int order, Smoothing smoothing,
                     bool sentence_end) {
  require(!corpus.empty(), "NGramLM::fit: empty corpus");
  require(order >= 1, "NGramLM::fit: order must be >= 1");
  NGramLM lm;
  lm.order_ = order;
  lm.smoothing_ = smoothing;
  lm.sentence_end_ = sentence_end;
  std::set<std::string> words;
  for (const Tokens& s : corpus) words.insert(s.begin(), s.end());
  words.insert(kUnk);
  if (sentence_end) words.insert(kEos);
  words.erase(kBos);
  lm.vocab_.assign(words.begin(), words.end());
  for (const std::string& w : lm.vocab_) lm.known_[w] = true;

  lm.contexts_.resize(static_cast<std::size_t>(order));
  for (const Tokens& s : corpus) {
    std::vector<std::string> padded(static_cast<std::size_t>(order - 1), kBos);
    padded.insert(padded.end(), s.begin(), s.end());
    if (sentence_end) padded.emplace_back(kEos);
    for (std::size_t i = static_cast<std::size_t>(order - 1); i < padded.size(); ++i) {
      for (int m = 0; m < order; ++m) {
        std::span<const std::string> hist(padded.data() + i - static_cast<std::size_t>(m),
                                          static_cast<std::size_t>(m));
        Context& ctx = lm.contexts_[static_cast<std::size_t>(m)][key(hist)];
        double& c = ctx.counts[padded[i]];
        if (c == 0) ctx.types += 1;
        c += 1;
        ctx.total += 1;
      }
    }
  }
  return lm;
}

double NGramLM::prob_at(std::span<const std::string> history, const std::string& word,
                        int n) const {
  const double uniform = 1.0 / static_cast<double>(vocab_.size());
  if (n < 0) return uniform;
  const std::size_t m = static_cast<std::size_t>(n);
  std::span<const std::string> hist = history.subspan(history.size() - m, m);
  const auto& table = contexts_[m];
  auto it = table.find(key(hist));
  if (smoothing_ == Smoothing::kLaplace) {
    double c = 0, total = 0;
    if (it != table.end()) {
      total = it->second.total;
      auto w = it->second.counts.find(word);
      if (w != it->second.counts.end()) c = w->second;
    }
    return (c + 1.0) / (total + static_cast<double>(vocab_.size()));
  }
  const double lower = prob_at(history, word, n - 1);
  if (it == table.end() || it->second.total == 0) return lower;
  const Context& ctx = it->second;
  auto w = ctx.counts.find(word);
  const double c = w == ctx.counts.end() ? 0.0 : w->second;
  return (c + ctx.types * lower) / (ctx.total + ctx.types);
}

double NGramLM::prob(std::span<const std::string> history, const std::string& word) const {
  std::vector<std::string> hist(static_cast<std::size_t>(order_ - 1), kBos);
  const std::size_t take = std::min(history.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t i = 0; i < take; ++i) {
    hist[hist.size() - take + i] = map_word(history[history.size() - take + i]);
  }
  return prob_at(hist, map_word(word), order_ - 1);
}

double NGramLM::logprob(std::span<const std::string> sentence) const {
  std::vector<std::string> padded(static_cast<std::size_t>(order_ - 1), kBos);
  for (const std::string& w : sentence) padded.push_back(map_word(w));
  if (sentence_end_) padded.emplace_back(kEos);
  double total = 0.0;
  const auto h = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = h; i < padded.size(); ++i) {
    std::span<const std::string> hist(padded.data() + i - h, h);
    total += std::log(prob_at(hist, padded[i], order_ - 1));
  }
  return total;
}

double NGramLM::normalized_logprob(std::span<const std::string> sentence) const {
  require(!sentence.empty(), "NGramLM: empty query");
  return logprob(sentence) / static_cast<double>(sentence.size());
}

nlohmann::json NGramLM::to_json() const {
  nlohmann::json j;
  j["order"] = order_;
  j["smoothing"] = smoothing_ == Smoothing::kLaplace ? "laplace" : "witten_bell";
  j["sentence_end"] = sentence_end_;
  j["vocab"] = vocab_;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& table : contexts_) {
    // Sorted for byte-stable output.
    std::map<std::string, std::map<std::string, double>> sorted;
    for (const auto& [k, ctx] : table) sorted[k] = {ctx.counts.begin(), ctx.counts.end()};
    levels.push_back(sorted);
  }
  j["counts"] = std::move(levels);
  return j;
}

NGramLM NGramLM::from_json(const nlohmann::json& j) {
  NGramLM lm;
  lm.order_ = j.at("order").get<int>();
  lm.smoothing_ = j.at("smoothing").get<std::string>() == "laplace" ? Smoothing::kLaplace
                                                                    : Smoothing::kWittenBell;
  lm.sentence_end_ = j.at("sentence_end").get<bool>();
  lm.vocab_ = j.at("vocab").get<std::vector<std::string>>();
  for (const std::string& w : lm.vocab_) lm.known_[w] = true;
  for (const auto& level : j.at("counts")) {
    std::unordered_map<std::string, Context> table;
    for (const auto& [k, counts] : level.items()) {
      Context& ctx = table[k];
      for (const auto& [w, c] : counts.items()) {
        ctx.counts[w] = c.get<double>();
        ctx.total += c.get<double>();
        ctx.types += 1;
      }
    }
    lm.contexts_.push_back(std::move(table));
  }
  require(static_cast<int>(lm.contexts_.size()) == lm.order_, "NGramLM: malformed counts");
  return lm;
}

}  // namespace confparse
