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

#include "confparse/interpret/interpret.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confparse/core/tensor.h"

namespace confparse {
namespace {

double log_magnitude(double v) {
  return std::abs(std::log(std::clamp(std::abs(v), 1e-12, 1e12)));
}

void spread_affine(const TracedGraph& g, const Node& n, const Vec& u, UncertaintyState& s) {
  std::size_t width = 0;
  for (NodeId in : n.inputs) width += g.value(in).size();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    double denom = 0.0;
    for (std::size_t m = 0; m < n.inputs.size(); ++m) {
      const Mat& w = g.params().at(n.weights[m]);
      const Vec& x = g.value(n.inputs[m]);
      for (std::size_t j = 0; j < x.size(); ++j) denom += std::abs(w(i, j) * x[j]);
    }
    for (std::size_t m = 0; m < n.inputs.size(); ++m) {
      const Mat& w = g.params().at(n.weights[m]);
      const Vec& x = g.value(n.inputs[m]);
      Vec& dst = s.mass[n.inputs[m]];
      for (std::size_t j = 0; j < x.size(); ++j) {
        dst[j] += denom > 0.0 ? u[i] * std::abs(w(i, j) * x[j]) / denom
                              : u[i] / static_cast<double>(width);
      }
    }
  }
}

// Shares each element between the inputs in proportion to weight(value).
template <typename Weight>
void spread_elementwise(const TracedGraph& g, const Node& n, const Vec& u, UncertaintyState& s,
                        Weight weight) {
  const double count = static_cast<double>(n.inputs.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    double denom = 0.0;
    for (NodeId in : n.inputs) denom += weight(g.value(in)[i]);
    for (NodeId in : n.inputs) {
      s.mass[in][i] += denom > 0.0 ? u[i] * weight(g.value(in)[i]) / denom : u[i] / count;
    }
  }
}

void spread_dot(const TracedGraph& g, const Node& n, const Vec& u, UncertaintyState& s) {
  const Vec& q = g.value(n.inputs[0]);
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] == 0.0) continue;
    const NodeId key = n.inputs[k + 1];
    const Vec& e = g.value(key);
    double denom = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) denom += std::abs(q[j] * e[j]);
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double share = denom > 0.0 ? u[k] * std::abs(q[j] * e[j]) / denom
                                       : u[k] / static_cast<double>(q.size());
      s.mass[n.inputs[0]][j] += 0.5 * share;
      s.mass[key][j] += 0.5 * share;
    }
  }
}

void redistribute(const TracedGraph& g, NodeId id, UncertaintyState& s) {
  const Node& n = g.node(id);
  const Vec u = s.mass[id];
  const bool any = std::any_of(u.begin(), u.end(), [](double v) { return v != 0.0; });
  if (!any) return;
  switch (n.kind) {
    case OpKind::kLeaf:
      return;
    case OpKind::kAffine:
      spread_affine(g, n, u, s);
      break;
    case OpKind::kAdd:
    case OpKind::kSub:
      spread_elementwise(g, n, u, s, [](double v) { return std::abs(v); });
      break;
    case OpKind::kMul:
      spread_elementwise(g, n, u, s, log_magnitude);
      break;
    case OpKind::kScalarMul:
    case OpKind::kNonlin:
    case OpKind::kSoftmax:
      for (std::size_t i = 0; i < u.size(); ++i) s.mass[n.inputs[0]][i] += u[i];
      break;
    case OpKind::kConcat: {
      std::size_t offset = 0;
      for (NodeId in : n.inputs) {
        Vec& dst = s.mass[in];
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += u[offset + j];
        offset += dst.size();
      }
      break;
    }
    case OpKind::kSelect:
      for (std::size_t j = 0; j < u.size(); ++j) s.mass[n.inputs[0]][n.indices[j]] += u[j];
      break;
    case OpKind::kDot:
      spread_dot(g, n, u, s);
      break;
  }
  std::fill(s.mass[id].begin(), s.mass[id].end(), 0.0);
}

}  // namespace

UncertaintyState empty_state(const TracedGraph& graph) {
  UncertaintyState s;
  s.mass.reserve(graph.size());
  for (NodeId id = 0; id < graph.size(); ++id) s.mass.emplace_back(graph.value(id).size(), 0.0);
  return s;
}

UncertaintyState init_uncertainty(const TracedGraph& graph, const ForcedPass& pass,
                                  std::span<const TokenId> targets, std::span<const double> u) {
  require(pass.steps.size() == targets.size() && targets.size() == u.size(),
          "init_uncertainty: prediction and trace lengths differ");
  UncertaintyState s = empty_state(graph);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    require(u[t] >= 0.0 && std::isfinite(u[t]), "init_uncertainty: invalid uncertainty");
    const std::size_t c = Seq2SeqModel::token_to_class(targets[t]);
    Vec& logits = s.mass.at(pass.steps[t].logits);
    require(c < logits.size(), "init_uncertainty: token outside the output layer");
    logits[c] += u[t];
    s.initial_mass += u[t];
  }
  return s;
}

void backprop_uncertainty(const TracedGraph& graph, UncertaintyState& state) {
  require(state.mass.size() == graph.size(), "backprop_uncertainty: state does not match trace");
  for (std::size_t id = graph.size(); id-- > 0;) {
    redistribute(graph, static_cast<NodeId>(id), state);
  }
}

double leaf_mass(const TracedGraph& graph, const UncertaintyState& state) {
  double total = 0.0;
  for (NodeId id = 0; id < graph.size(); ++id) {
    if (graph.node(id).kind != OpKind::kLeaf) continue;
    for (double v : state.mass[id]) total += v;
  }
  return total;
}

const char* interpret_method_name(InterpretMethod m) {
  return m == InterpretMethod::kBackprop ? "backprop" : "attention";
}

namespace {

void normalise(UncertaintyReport& r) {
  const double total = std::accumulate(r.raw.begin(), r.raw.end(), 0.0);
  r.scores.assign(r.raw.size(), 0.0);
  if (r.raw.empty()) return;
  if (!(total > 0.0)) {
    r.zero_mass = true;
    std::fill(r.scores.begin(), r.scores.end(), 1.0 / static_cast<double>(r.raw.size()));
    return;
  }
  for (std::size_t k = 0; k < r.raw.size(); ++k) r.scores[k] = r.raw[k] / total;
}

}  // namespace

UncertaintyReport aggregate_tokens(const TracedGraph& graph, const UncertaintyState& state,
                                   std::size_t length) {
  UncertaintyReport r;
  r.method = InterpretMethod::kBackprop;
  r.raw.assign(length, 0.0);
  double absorbed = 0.0;
  for (NodeId id = 0; id < graph.size(); ++id) {
    const Node& n = graph.node(id);
    if (n.kind != OpKind::kLeaf) continue;
    const double m = std::accumulate(state.mass[id].begin(), state.mass[id].end(), 0.0);
    if (n.leaf == LeafKind::kSourceWord && n.position >= 0 &&
        static_cast<std::size_t>(n.position) < length) {
      r.raw[static_cast<std::size_t>(n.position)] += m;
    } else {
      absorbed += m;
    }
  }
  const double total = absorbed + std::accumulate(r.raw.begin(), r.raw.end(), 0.0);
  r.absorbed_fraction = total > 0.0 ? absorbed / total : 0.0;
  normalise(r);
  return r;
}

UncertaintyReport interpret_backprop(const Seq2SeqModel& model, std::span<const TokenId> source,
                                     std::span<const TokenId> targets, std::span<const double> u) {
  TracedGraph graph(&model.params());
  const ForcedPass pass = teacher_forced(model, graph, source, targets);
  UncertaintyState state = init_uncertainty(graph, pass, targets, u);
  backprop_uncertainty(graph, state);
  UncertaintyReport r = aggregate_tokens(graph, state, source.size());
  r.output_uncertainty.assign(u.begin(), u.end());
  return r;
}

UncertaintyReport attention_interpretation(const Mat& attention, std::span<const double> u) {
  require(attention.rows() == u.size(), "attention_interpretation: step count mismatch");
  UncertaintyReport r;
  r.method = InterpretMethod::kAttention;
  r.raw.assign(attention.cols(), 0.0);
  for (std::size_t t = 0; t < attention.rows(); ++t) {
    for (std::size_t k = 0; k < attention.cols(); ++k) r.raw[k] += attention(t, k) * u[t];
  }
  r.output_uncertainty.assign(u.begin(), u.end());
  normalise(r);
  return r;
}

nlohmann::json report_to_json(const UncertaintyReport& r) {
  return {{"method", interpret_method_name(r.method)},
          {"tokens", r.tokens},
          {"scores", r.scores},
          {"raw", r.raw},
          {"output_uncertainty", r.output_uncertainty},
          {"absorbed_fraction", r.absorbed_fraction},
          {"zero_mass", r.zero_mass}};
}

UncertaintyReport report_from_json(const nlohmann::json& j) {
  UncertaintyReport r;
  const std::string method = j.at("method").get<std::string>();
  require(method == "backprop" || method == "attention", "report: unknown method " + method);
  r.method = method == "backprop" ? InterpretMethod::kBackprop : InterpretMethod::kAttention;
  r.tokens = j.at("tokens").get<Tokens>();
  r.scores = j.at("scores").get<std::vector<double>>();
  r.raw = j.at("raw").get<std::vector<double>>();
  r.output_uncertainty = j.at("output_uncertainty").get<std::vector<double>>();
  r.absorbed_fraction = j.at("absorbed_fraction").get<double>();
  r.zero_mass = j.at("zero_mass").get<bool>();
  return r;
}

}  // namespace confparse
