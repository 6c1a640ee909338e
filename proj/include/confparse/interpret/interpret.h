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

#ifndef CONFPARSE_INTERPRET_INTERPRET_H_
#define CONFPARSE_INTERPRET_INTERPRET_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "confparse/core/graph.h"
#include "confparse/seq2seq/decode.h"

namespace confparse {

// Uncertainty score of every element of every node in a trace.
struct UncertaintyState {
  std::vector<Vec> mass;
  double initial_mass = 0.0;
};

// Zero state shaped like the trace.
UncertaintyState empty_state(const TracedGraph& graph);

// Places u[t] on the pre-softmax neuron of token targets[t] at decoder step t
// (targets include EOS).
UncertaintyState init_uncertainty(const TracedGraph& graph, const ForcedPass& pass,
                                  std::span<const TokenId> targets, std::span<const double> u);

// Moves all mass from each non-leaf node to its inputs, visiting nodes in
// reverse creation order so every node has gathered from all consumers
// before it redistributes.
void backprop_uncertainty(const TracedGraph& graph, UncertaintyState& state);

// Total mass held by leaves.
double leaf_mass(const TracedGraph& graph, const UncertaintyState& state);

enum class InterpretMethod { kBackprop, kAttention };
const char* interpret_method_name(InterpretMethod m);

struct UncertaintyReport {
  InterpretMethod method = InterpretMethod::kBackprop;
  Tokens tokens;
  std::vector<double> scores;  // normalised, sums to 1
  std::vector<double> raw;     // before normalisation
  std::vector<double> output_uncertainty;  // u_{a_t}
  double absorbed_fraction = 0.0;  // mass that ended on non-source leaves
  bool zero_mass = false;          // scores fell back to uniform
};

// Sums mass on source word leaves per position; `length` is |q|.
UncertaintyReport aggregate_tokens(const TracedGraph& graph, const UncertaintyState& state,
                                   std::size_t length);

// Full pipeline for one example: trace the teacher-forced prediction,
// initialise with u, backpropagate and aggregate.
UncertaintyReport interpret_backprop(const Seq2SeqModel& model, std::span<const TokenId> source,
                                     std::span<const TokenId> targets, std::span<const double> u);

// Scores proportional to sum_t r[t][k] u[t].
UncertaintyReport attention_interpretation(const Mat& attention, std::span<const double> u);

nlohmann::json report_to_json(const UncertaintyReport& r);
UncertaintyReport report_from_json(const nlohmann::json& j);

}  // namespace confparse

#endif  // CONFPARSE_INTERPRET_INTERPRET_H_
