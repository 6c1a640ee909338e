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

#ifndef CONFPARSE_SEQ2SEQ_MODEL_H_
#define CONFPARSE_SEQ2SEQ_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "confparse/core/graph.h"
#include "confparse/core/kernels.h"
#include "confparse/seq2seq/vocab.h"

namespace confparse {

struct ModelConfig {
  std::size_t embed_dim = 150;
  std::size_t hidden_dim = 150;
  int layers = 1;
  bool operator==(const ModelConfig&) const = default;
};

// Gate order within the arrays: input, forget, output, candidate.
struct LstmLayer {
  std::array<ParamId, 4> wx{};
  std::array<ParamId, 4> wh{};
  std::array<ParamId, 4> b{};
};

struct LstmState {
  std::vector<NodeId> h;  // one per layer
  std::vector<NodeId> c;
};

// Perturbation sites of the encoder-decoder.
enum class Site : unsigned {
  kSourceTokens = 1u << 0,
  kTargetTokens = 1u << 1,
  kEncoderOutputs = 1u << 2,
  kBridge = 1u << 3,
  kDecodingVectors = 1u << 4,
};
using SiteSet = unsigned;
inline constexpr SiteSet kTokenVectors =
    static_cast<unsigned>(Site::kSourceTokens) | static_cast<unsigned>(Site::kTargetTokens);
inline constexpr SiteSet kAllSites = 0x1f;

enum class NoiseKind { kNone, kDropout, kGaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  // Dropout rate or Gaussian standard deviation.
  double strength = 0.0;
  NoiseMode mode = NoiseMode::kAdditive;
  SiteSet sites = kAllSites;
  // When set, only the source token at this position is perturbed.
  std::optional<int> only_source_position;
};

// Applies NoiseSpec at the sites it selects by inserting constant leaves
// and elementwise nodes into the trace. Holds its own random stream.
class NoiseInjector {
 public:
  NoiseInjector(NoiseSpec spec, RngStream rng) : spec_(spec), rng_(rng) {}
  NodeId apply(TracedGraph& graph, NodeId v, Site site, int position);
  const NoiseSpec& spec() const { return spec_; }

 private:
  NoiseSpec spec_;
  RngStream rng_;
};

// Attention encoder-decoder with LSTM encoder and decoder. Parameters are
// immutable during inference, so one model can serve concurrent passes that
// each own a TracedGraph.
class Seq2SeqModel {
 public:
  Seq2SeqModel(ModelConfig config, Vocab source, Vocab target, std::uint64_t init_seed);
  // Used by checkpoint loading: parameters are supplied rather than drawn.
  Seq2SeqModel(ModelConfig config, Vocab source, Vocab target, ParamStore params);

  const ModelConfig& config() const { return config_; }
  const Vocab& source_vocab() const { return source_; }
  const Vocab& target_vocab() const { return target_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t output_classes() const { return target_.size() - Vocab::kFirstOutput; }
  static TokenId class_to_token(std::size_t c) {
    return static_cast<TokenId>(c) + Vocab::kFirstOutput;
  }
  static std::size_t token_to_class(TokenId t);

  ParamId source_embedding() const { return src_emb_; }
  ParamId target_embedding() const { return tgt_emb_; }
  const std::vector<LstmLayer>& encoder() const { return enc_; }
  const std::vector<LstmLayer>& decoder() const { return dec_; }
  ParamId attention_query_weight() const { return w1_; }
  ParamId attention_context_weight() const { return w2_; }
  ParamId output_weight() const { return wo_; }

 private:
  void declare_params(std::uint64_t init_seed, bool draw);

  ModelConfig config_;
  Vocab source_;
  Vocab target_;
  ParamStore params_;
  ParamId src_emb_ = kNoParam;
  ParamId tgt_emb_ = kNoParam;
  std::vector<LstmLayer> enc_;
  std::vector<LstmLayer> dec_;
  ParamId w1_ = kNoParam;
  ParamId w2_ = kNoParam;
  ParamId wo_ = kNoParam;
};

// One LSTM step; every gate affine and elementwise product is its own node.
std::pair<NodeId, NodeId> lstm_step(TracedGraph& graph, const LstmLayer& layer, NodeId x,
                                    NodeId prev_h, NodeId prev_c);
// Value-level convenience wrapper around the traced step.
std::pair<Vec, Vec> lstm_step(const ParamStore& params, const LstmLayer& layer,
                              std::span<const double> prev_h, std::span<const double> prev_c,
                              std::span<const double> x);
// Adds one LSTM layer's parameters (drawn uniformly from [-init, init] when
// rng is given, zero otherwise).
LstmLayer add_lstm_layer(ParamStore& params, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_dim, RngStream* rng, double init = 0.08);

struct Encoding {
  std::vector<NodeId> word_leaves;  // source embedding leaf per position
  std::vector<NodeId> memory;       // attention memory e_1..e_|q|
  LstmState final_state;            // unperturbed last encoder state
};

struct StepOutput {
  LstmState state;
  NodeId target_leaf = 0;  // embedding leaf of the previous token
  NodeId scores = 0;
  NodeId attention = 0;
  NodeId context = 0;
  NodeId att_hidden = 0;
  NodeId logits = 0;
  NodeId probs = 0;
};

Encoding encode(const Seq2SeqModel& model, TracedGraph& graph, std::span<const TokenId> source,
                NoiseInjector* noise = nullptr);
// Decoder initial state from the encoder's final state.
LstmState bridge(const Seq2SeqModel& model, TracedGraph& graph, const Encoding& enc,
                 NoiseInjector* noise = nullptr);
StepOutput decode_step(const Seq2SeqModel& model, TracedGraph& graph, const LstmState& prev,
                       TokenId prev_token, int step, const Encoding& enc,
                       NoiseInjector* noise = nullptr);

// Encoder hidden states e_1..e_|q| as values.
std::vector<Vec> encode(const Seq2SeqModel& model, std::span<const TokenId> source);

struct ForcedPass {
  Encoding encoding;
  std::vector<StepOutput> steps;
  std::vector<double> token_probs;  // p(a_t | a_<t, q)
  double logprob = 0.0;
};

// Scores a fixed target (ending in EOS) by feeding its own tokens back.
ForcedPass teacher_forced(const Seq2SeqModel& model, TracedGraph& graph,
                          std::span<const TokenId> source, std::span<const TokenId> target,
                          NoiseInjector* noise = nullptr);

// log p(a | q), teacher-forced.
double sequence_logprob(const Seq2SeqModel& model, std::span<const TokenId> source,
                        std::span<const TokenId> target);

}  // namespace confparse

#endif  // CONFPARSE_SEQ2SEQ_MODEL_H_
