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

#ifndef CONFPARSE_CORE_GRAPH_H_
#define CONFPARSE_CORE_GRAPH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confparse/core/kernels.h"
#include "confparse/core/tensor.h"

namespace confparse {

using NodeId = std::uint32_t;
using ParamId = int;
inline constexpr ParamId kNoParam = -1;

// Named parameter tensors. Biases are stored as single-column matrices.
class ParamStore {
 public:
  ParamId add(std::string name, Mat value);
  Mat& at(ParamId id) { return values_.at(static_cast<std::size_t>(id)); }
  const Mat& at(ParamId id) const { return values_.at(static_cast<std::size_t>(id)); }
  const std::string& name(ParamId id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::optional<ParamId> find(const std::string& name) const;
  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;

  ParamStore zeros_like() const;
  void set_zero();
  double squared_norm() const;
  // this += alpha * other (shapes must match).
  void axpy(double alpha, const ParamStore& other);

  bool operator==(const ParamStore& other) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kAffine,
  kAdd,
  kSub,
  kMul,
  kScalarMul,
  kNonlin,
  kSoftmax,
  kConcat,
  kSelect,
  kDot,
};

// What a leaf stands for; the interpreter sums mass on kSourceWord leaves
// and reports everything else as absorbed.
enum class LeafKind : std::uint8_t {
  kSourceWord,
  kTargetWord,
  kInitialState,
  kConstant,
  kInput,
};

const char* op_kind_name(OpKind kind);

struct Node {
  OpKind kind = OpKind::kLeaf;
  std::vector<NodeId> inputs;
  Vec value;

  // kAffine: value = sum_m weights[m] * inputs[m] + bias.
  std::vector<ParamId> weights;
  ParamId bias = kNoParam;
  // kNonlin
  Nonlinearity nonlin = Nonlinearity::kTanh;
  // kSelect: value[j] = inputs[0][indices[j]]
  std::vector<std::size_t> indices;
  // kScalarMul with one input: value = scalar * inputs[0]. With two inputs
  // the factor is the one-element node inputs[1].
  double scalar = 1.0;
  // kLeaf
  LeafKind leaf = LeafKind::kInput;
  int position = -1;
  ParamId table = kNoParam;
  std::size_t row = 0;
};

// Append-only record of a forward computation. Node ids are assigned in
// creation order, which is a topological order: every input id is smaller
// than the id of the node consuming it.
class TracedGraph {
 public:
  explicit TracedGraph(const ParamStore* params) : params_(params) {}

  NodeId leaf(Vec value, LeafKind kind, int position = -1);
  // Row `row` of parameter table `table`; gradients flow into that row.
  NodeId embedding(ParamId table, std::size_t row, LeafKind kind, int position);
  NodeId affine(std::span<const ParamId> weights, std::span<const NodeId> inputs,
                ParamId bias = kNoParam);
  NodeId affine(ParamId weight, NodeId x, ParamId bias = kNoParam);
  NodeId add(NodeId a, NodeId b);
  NodeId add(std::span<const NodeId> terms);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scalar_mul(NodeId x, NodeId factor);
  NodeId scalar_mul(NodeId x, double factor);
  NodeId nonlin(Nonlinearity f, NodeId x);
  NodeId softmax(NodeId x);
  NodeId concat(std::span<const NodeId> parts);
  NodeId select(NodeId x, std::vector<std::size_t> indices);
  // value[k] = query . keys[k]
  NodeId dot(NodeId query, std::span<const NodeId> keys);

  const Vec& value(NodeId id) const { return nodes_[id].value; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  const ParamStore& params() const { return *params_; }

  // Reverse-mode accumulation of d(loss)/d(param) into `grads` given
  // d(loss)/d(node) seeds.
  void backward(std::span<const std::pair<NodeId, Vec>> seeds, ParamStore& grads) const;

  // Recomputes every non-leaf node from its recorded inputs and returns the
  // number of nodes whose output differs bitwise from the recording.
  std::size_t replay_mismatches() const;

 private:
  NodeId push(Node node);
  Vec compute(const Node& node) const;

  const ParamStore* params_;
  std::vector<Node> nodes_;
};

}  // namespace confparse

#endif  // CONFPARSE_CORE_GRAPH_H_
