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

#include "confparse/seq2seq/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace confparse {
namespace {

struct Hypothesis {
  LstmState state;
  Prediction pred;
};

void append_step(Hypothesis& h, const TracedGraph& graph, const StepOutput& step, std::size_t cls) {
  const Vec& dist = graph.value(step.probs);
  const double p = dist[cls];
  h.pred.tokens.push_back(Seq2SeqModel::class_to_token(cls));
  h.pred.distributions.push_back(dist);
  h.pred.token_probs.push_back(p);
  h.pred.logprob += std::log(p);
  h.state = step.state;
}

Prediction finalize(Prediction pred, std::vector<Vec> attention_rows, std::size_t source_len) {
  pred.attention = Mat(attention_rows.size(), source_len);
  for (std::size_t t = 0; t < attention_rows.size(); ++t) {
    std::copy(attention_rows[t].begin(), attention_rows[t].end(), pred.attention.row(t).begin());
  }
  pred.terminated = !pred.tokens.empty() && pred.tokens.back() == Vocab::kEos;
  return pred;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::size_t default_max_length(std::size_t source_length) { return 2 * source_length + 10; }

Prediction greedy_decode(const Seq2SeqModel& model, std::span<const TokenId> source,
                         std::size_t max_length) {
  if (max_length == 0) max_length = default_max_length(source.size());
  TracedGraph graph(&model.params());
  const Encoding enc = encode(model, graph, source);
  Hypothesis h{bridge(model, graph, enc), {}};
  std::vector<Vec> rows;
  TokenId prev = Vocab::kBos;
  for (std::size_t t = 0; t < max_length; ++t) {
    const StepOutput step = decode_step(model, graph, h.state, prev, static_cast<int>(t), enc);
    const std::size_t cls = argmax(graph.value(step.probs));
    append_step(h, graph, step, cls);
    rows.push_back(graph.value(step.attention));
    prev = h.pred.tokens.back();
    if (prev == Vocab::kEos) break;
  }
  return finalize(std::move(h.pred), std::move(rows), source.size());
}

std::vector<Prediction> beam_search(const Seq2SeqModel& model, std::span<const TokenId> source,
                                    std::size_t beam_size, std::size_t max_length) {
  require(beam_size >= 1, "beam_search: beam size must be >= 1");
  if (max_length == 0) max_length = default_max_length(source.size());
  TracedGraph graph(&model.params());
  const Encoding enc = encode(model, graph, source);

  struct Live {
    Hypothesis hyp;
    std::vector<Vec> rows;
  };
  std::vector<Live> live;
  live.push_back({{bridge(model, graph, enc), {}}, {}});
  std::vector<Live> finished;

  struct Candidate {
    double logprob;
    std::size_t parent;
    std::size_t cls;
  };

  for (std::size_t t = 0; t < max_length && !live.empty(); ++t) {
    std::vector<StepOutput> steps;
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Live& l = live[i];
      const TokenId prev = l.hyp.pred.tokens.empty() ? Vocab::kBos : l.hyp.pred.tokens.back();
      steps.push_back(decode_step(model, graph, l.hyp.state, prev, static_cast<int>(t), enc));
      const Vec& dist = graph.value(steps.back().probs);
      for (std::size_t c = 0; c < dist.size(); ++c) {
        cands.push_back({l.hyp.pred.logprob + std::log(dist[c]), i, c});
      }
    }
    const std::size_t keep = std::min(beam_size, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.cls < b.cls;
                      });
    std::vector<Live> next;
    for (std::size_t j = 0; j < keep; ++j) {
      const Candidate& c = cands[j];
      Live child = live[c.parent];
      append_step(child.hyp, graph, steps[c.parent], c.cls);
      child.rows.push_back(graph.value(steps[c.parent].attention));
      if (Seq2SeqModel::class_to_token(c.cls) == Vocab::kEos || t + 1 == max_length) {
        finished.push_back(std::move(child));
      } else {
        next.push_back(std::move(child));
      }
    }
    live = std::move(next);
    std::stable_sort(finished.begin(), finished.end(), [](const Live& a, const Live& b) {
      return a.hyp.pred.logprob > b.hyp.pred.logprob;
    });
    if (finished.size() >= beam_size) {
      // Extending a hypothesis can only lower its score.
      const double bar = finished[beam_size - 1].hyp.pred.logprob;
      std::erase_if(live, [bar](const Live& l) { return l.hyp.pred.logprob <= bar; });
    }
  }

  std::vector<Prediction> out;
  for (std::size_t i = 0; i < finished.size() && i < beam_size; ++i) {
    Prediction p = finalize(std::move(finished[i].hyp.pred), std::move(finished[i].rows), source.size());
    p.rank = static_cast<int>(i);
    out.push_back(std::move(p));
  }
  return out;
}

Prediction sample_sequence(const Seq2SeqModel& model, std::span<const TokenId> source,
                           RngStream& rng, std::size_t max_length) {
  if (max_length == 0) max_length = default_max_length(source.size());
  TracedGraph graph(&model.params());
  const Encoding enc = encode(model, graph, source);
  Hypothesis h{bridge(model, graph, enc), {}};
  std::vector<Vec> rows;
  TokenId prev = Vocab::kBos;
  for (std::size_t t = 0; t < max_length; ++t) {
    const StepOutput step = decode_step(model, graph, h.state, prev, static_cast<int>(t), enc);
    const Vec& dist = graph.value(step.probs);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t cls = dist.size() - 1;
    for (std::size_t c = 0; c < dist.size(); ++c) {
      acc += dist[c];
      if (u < acc) {
        cls = c;
        break;
      }
    }
    // Rounding can leave acc slightly below 1; never pick a zero-mass class.
    while (dist[cls] == 0.0 && cls > 0) --cls;
    append_step(h, graph, step, cls);
    rows.push_back(graph.value(step.attention));
    prev = h.pred.tokens.back();
    if (prev == Vocab::kEos) break;
  }
  return finalize(std::move(h.pred), std::move(rows), source.size());
}

Prediction score_target(const Seq2SeqModel& model, std::span<const TokenId> source,
                        std::span<const TokenId> target) {
  TracedGraph graph(&model.params());
  const ForcedPass pass = teacher_forced(model, graph, source, target);
  Prediction pred;
  std::vector<Vec> rows;
  for (std::size_t t = 0; t < target.size(); ++t) {
    pred.tokens.push_back(target[t]);
    pred.distributions.push_back(graph.value(pass.steps[t].probs));
    pred.token_probs.push_back(pass.token_probs[t]);
    rows.push_back(graph.value(pass.steps[t].attention));
  }
  pred.logprob = pass.logprob;
  return finalize(std::move(pred), std::move(rows), source.size());
}

Tokens output_tokens(const Prediction& pred, const Vocab& target,
                     std::span<const std::string> source, bool replace) {
  Tokens out;
  for (std::size_t t = 0; t < pred.tokens.size(); ++t) {
    const TokenId id = pred.tokens[t];
    if (id == Vocab::kEos) break;
    if (replace && id == Vocab::kUnk && t < pred.attention.rows() && !source.empty()) {
      const auto row = pred.attention.row(t);
      const auto k = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      out.push_back(source[std::min(k, source.size() - 1)]);
    } else {
      out.push_back(target.token(id));
    }
  }
  return out;
}

Tokens replace_unk(const Prediction& pred, const Vocab& target, std::span<const std::string> source) {
  return output_tokens(pred, target, source, true);
}

}  // namespace confparse
