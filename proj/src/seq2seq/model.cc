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

#include "confparse/seq2seq/model.h"

#include <cmath>
#include <string>

namespace confparse {
namespace {

Mat uniform_mat(std::size_t rows, std::size_t cols, RngStream* rng, double init) {
  Mat m(rows, cols);
  if (rng != nullptr) {
    for (double& v : m.flat()) v = (2.0 * rng->uniform() - 1.0) * init;
  }
  return m;
}

}  // namespace

NodeId NoiseInjector::apply(TracedGraph& graph, NodeId v, Site site, int position) {
  if (spec_.kind == NoiseKind::kNone || spec_.strength == 0.0) return v;
  if ((spec_.sites & static_cast<unsigned>(site)) == 0) return v;
  if (spec_.only_source_position.has_value() &&
      (site != Site::kSourceTokens || position != *spec_.only_source_position)) {
    return v;
  }
  const std::size_t n = graph.value(v).size();
  if (spec_.kind == NoiseKind::kDropout) {
    const NodeId mask = graph.leaf(dropout_mask(spec_.strength, n, rng_), LeafKind::kConstant);
    return graph.mul(v, mask);
  }
  Vec g(n);
  for (double& x : g) x = spec_.strength * rng_.normal();
  const NodeId noise = graph.leaf(std::move(g), LeafKind::kConstant);
  if (spec_.mode == NoiseMode::kAdditive) return graph.add(v, noise);
  return graph.add(v, graph.mul(v, noise));
}

LstmLayer add_lstm_layer(ParamStore& params, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_dim, RngStream* rng, double init) {
  static constexpr const char* kGate[4] = {"i", "f", "o", "g"};
  LstmLayer layer;
  for (int g = 0; g < 4; ++g) {
    layer.wx[g] = params.add(prefix + ".wx_" + kGate[g], uniform_mat(hidden_dim, input_dim, rng, init));
    layer.wh[g] = params.add(prefix + ".wh_" + kGate[g], uniform_mat(hidden_dim, hidden_dim, rng, init));
    layer.b[g] = params.add(prefix + ".b_" + kGate[g], uniform_mat(hidden_dim, 1, rng, init));
  }
  return layer;
}

Seq2SeqModel::Seq2SeqModel(ModelConfig config, Vocab source, Vocab target,
                           std::uint64_t init_seed)
    : config_(config), source_(std::move(source)), target_(std::move(target)) {
  declare_params(init_seed, true);
}

Seq2SeqModel::Seq2SeqModel(ModelConfig config, Vocab source, Vocab target, ParamStore params)
    : config_(config), source_(std::move(source)), target_(std::move(target)) {
  declare_params(0, false);
  require(params.size() == params_.size(), "Seq2SeqModel: parameter count mismatch");
  for (std::size_t p = 0; p < params_.size(); ++p) {
    const auto id = static_cast<ParamId>(p);
    require(params.name(id) == params_.name(id), "Seq2SeqModel: parameter name mismatch: " +
                                                     params.name(id));
    require(params.at(id).rows() == params_.at(id).rows() &&
                params.at(id).cols() == params_.at(id).cols(),
            "Seq2SeqModel: parameter shape mismatch: " + params.name(id));
  }
  params_ = std::move(params);
}

void Seq2SeqModel::declare_params(std::uint64_t init_seed, bool draw) {
  require(config_.layers >= 1 && config_.embed_dim > 0 && config_.hidden_dim > 0,
          "Seq2SeqModel: invalid dimensions");
  require(target_.size() > static_cast<std::size_t>(Vocab::kFirstOutput),
          "Seq2SeqModel: empty target vocabulary");
  RngStream rng(init_seed);
  RngStream* r = draw ? &rng : nullptr;
  const std::size_t e = config_.embed_dim;
  const std::size_t n = config_.hidden_dim;
  src_emb_ = params_.add("src_embedding", uniform_mat(source_.size(), e, r, 0.08));
  tgt_emb_ = params_.add("tgt_embedding", uniform_mat(target_.size(), e, r, 0.08));
  for (int l = 0; l < config_.layers; ++l) {
    enc_.push_back(add_lstm_layer(params_, "enc" + std::to_string(l), l == 0 ? e : n, n, r));
  }
  for (int l = 0; l < config_.layers; ++l) {
    dec_.push_back(add_lstm_layer(params_, "dec" + std::to_string(l), l == 0 ? e : n, n, r));
  }
  w1_ = params_.add("att_w1", uniform_mat(n, n, r, 0.08));
  w2_ = params_.add("att_w2", uniform_mat(n, n, r, 0.08));
  wo_ = params_.add("out_w", uniform_mat(output_classes(), n, r, 0.08));
}

std::size_t Seq2SeqModel::token_to_class(TokenId t) {
  require(t >= Vocab::kFirstOutput, "token is not an output class");
  return static_cast<std::size_t>(t - Vocab::kFirstOutput);
}

std::pair<NodeId, NodeId> lstm_step(TracedGraph& graph, const LstmLayer& layer, NodeId x,
                                    NodeId prev_h, NodeId prev_c) {
  std::array<NodeId, 4> gate{};
  const NodeId in[2] = {x, prev_h};
  for (int g = 0; g < 4; ++g) {
    const ParamId w[2] = {layer.wx[g], layer.wh[g]};
    const NodeId pre = graph.affine(w, in, layer.b[g]);
    gate[g] = graph.nonlin(g == 3 ? Nonlinearity::kTanh : Nonlinearity::kSigmoid, pre);
  }
  const NodeId keep = graph.mul(gate[1], prev_c);
  const NodeId write = graph.mul(gate[0], gate[3]);
  const NodeId c = graph.add(keep, write);
  const NodeId h = graph.mul(gate[2], graph.nonlin(Nonlinearity::kTanh, c));
  return {h, c};
}

std::pair<Vec, Vec> lstm_step(const ParamStore& params, const LstmLayer& layer,
                              std::span<const double> prev_h, std::span<const double> prev_c,
                              std::span<const double> x) {
  TracedGraph graph(&params);
  const NodeId xi = graph.leaf(Vec(x.begin(), x.end()), LeafKind::kInput);
  const NodeId hi = graph.leaf(Vec(prev_h.begin(), prev_h.end()), LeafKind::kInitialState);
  const NodeId ci = graph.leaf(Vec(prev_c.begin(), prev_c.end()), LeafKind::kInitialState);
  const auto [h, c] = lstm_step(graph, layer, xi, hi, ci);
  return {graph.value(h), graph.value(c)};
}

Encoding encode(const Seq2SeqModel& model, TracedGraph& graph, std::span<const TokenId> source,
                NoiseInjector* noise) {
  require(!source.empty(), "encode: empty input");
  const std::size_t n = model.config().hidden_dim;
  const auto layers = static_cast<std::size_t>(model.config().layers);
  Encoding enc;
  LstmState state;
  for (std::size_t l = 0; l < layers; ++l) {
    state.h.push_back(graph.leaf(Vec(n, 0.0), LeafKind::kInitialState));
    state.c.push_back(graph.leaf(Vec(n, 0.0), LeafKind::kInitialState));
  }
  for (std::size_t k = 0; k < source.size(); ++k) {
    const int pos = static_cast<int>(k);
    NodeId x = graph.embedding(model.source_embedding(), static_cast<std::size_t>(source[k]),
                               LeafKind::kSourceWord, pos);
    enc.word_leaves.push_back(x);
    if (noise) x = noise->apply(graph, x, Site::kSourceTokens, pos);
    for (std::size_t l = 0; l < layers; ++l) {
      std::tie(state.h[l], state.c[l]) =
          lstm_step(graph, model.encoder()[l], x, state.h[l], state.c[l]);
      x = state.h[l];
    }
    enc.memory.push_back(noise ? noise->apply(graph, x, Site::kEncoderOutputs, pos) : x);
  }
  enc.final_state = state;
  return enc;
}

LstmState bridge(const Seq2SeqModel&, TracedGraph& graph, const Encoding& enc,
                 NoiseInjector* noise) {
  LstmState s = enc.final_state;
  if (noise) {
    for (std::size_t l = 0; l < s.h.size(); ++l) {
      s.h[l] = noise->apply(graph, s.h[l], Site::kBridge, static_cast<int>(l));
    }
  }
  return s;
}

StepOutput decode_step(const Seq2SeqModel& model, TracedGraph& graph, const LstmState& prev,
                       TokenId prev_token, int step, const Encoding& enc, NoiseInjector* noise) {
  require(!enc.memory.empty(), "decode_step: empty encoder memory");
  StepOutput out;
  out.target_leaf = graph.embedding(model.target_embedding(), static_cast<std::size_t>(prev_token),
                                    LeafKind::kTargetWord, step);
  NodeId x = out.target_leaf;
  if (noise) x = noise->apply(graph, x, Site::kTargetTokens, step);
  out.state = prev;
  for (std::size_t l = 0; l < prev.h.size(); ++l) {
    std::tie(out.state.h[l], out.state.c[l]) =
        lstm_step(graph, model.decoder()[l], x, prev.h[l], prev.c[l]);
    x = out.state.h[l];
  }
  const NodeId query = x;

  // Attention: r = softmax(d . e_k); context = sum_k r_k e_k, where each
  // r_k enters as the factor of a scalar multiplication.
  out.scores = graph.dot(query, enc.memory);
  out.attention = graph.softmax(out.scores);
  std::vector<NodeId> terms;
  terms.reserve(enc.memory.size());
  for (std::size_t k = 0; k < enc.memory.size(); ++k) {
    terms.push_back(graph.scalar_mul(enc.memory[k], graph.select(out.attention, {k})));
  }
  out.context = terms.size() == 1 ? terms[0] : graph.add(terms);

  const ParamId w[2] = {model.attention_query_weight(), model.attention_context_weight()};
  const NodeId in[2] = {query, out.context};
  out.att_hidden = graph.nonlin(Nonlinearity::kTanh, graph.affine(w, in));
  const NodeId dvec =
      noise ? noise->apply(graph, out.att_hidden, Site::kDecodingVectors, step) : out.att_hidden;
  out.logits = graph.affine(model.output_weight(), dvec);
  out.probs = graph.softmax(out.logits);
  return out;
}

std::vector<Vec> encode(const Seq2SeqModel& model, std::span<const TokenId> source) {
  TracedGraph graph(&model.params());
  const Encoding enc = encode(model, graph, source);
  std::vector<Vec> states;
  for (NodeId e : enc.memory) states.push_back(graph.value(e));
  return states;
}

ForcedPass teacher_forced(const Seq2SeqModel& model, TracedGraph& graph,
                          std::span<const TokenId> source, std::span<const TokenId> target,
                          NoiseInjector* noise) {
  require(!target.empty(), "teacher_forced: empty target");
  ForcedPass pass;
  pass.encoding = encode(model, graph, source, noise);
  LstmState state = bridge(model, graph, pass.encoding, noise);
  TokenId prev = Vocab::kBos;
  for (std::size_t t = 0; t < target.size(); ++t) {
    StepOutput step = decode_step(model, graph, state, prev, static_cast<int>(t), pass.encoding, noise);
    const double p = graph.value(step.probs)[Seq2SeqModel::token_to_class(target[t])];
    pass.token_probs.push_back(p);
    pass.logprob += std::log(p);
    state = step.state;
    prev = target[t];
    pass.steps.push_back(std::move(step));
  }
  return pass;
}

double sequence_logprob(const Seq2SeqModel& model, std::span<const TokenId> source,
                        std::span<const TokenId> target) {
  require(!target.empty() && target.back() == Vocab::kEos,
          "sequence_logprob: target must end with EOS");
  TracedGraph graph(&model.params());
  return teacher_forced(model, graph, source, target).logprob;
}

}  // namespace confparse
