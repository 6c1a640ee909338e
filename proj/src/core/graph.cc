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

#include "confparse/core/graph.h"

#include <algorithm>
#include <cstring>

namespace confparse {

ParamId ParamStore::add(std::string name, Mat value) {
  require(!find(name).has_value(), "ParamStore: duplicate parameter " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return static_cast<ParamId>(values_.size() - 1);
}

std::optional<ParamId> ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<ParamId>(i);
  }
  return std::nullopt;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Mat& m : values_) n += m.size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore z;
  z.names_ = names_;
  z.values_.reserve(values_.size());
  for (const Mat& m : values_) z.values_.emplace_back(m.rows(), m.cols());
  return z;
}

void ParamStore::set_zero() {
  for (Mat& m : values_) m.fill(0.0);
}

double ParamStore::squared_norm() const {
  double s = 0.0;
  for (const Mat& m : values_)
    for (double v : m.flat()) s += v * v;
  return s;
}

void ParamStore::axpy(double alpha, const ParamStore& other) {
  require(other.values_.size() == values_.size(), "ParamStore::axpy: size mismatch");
  for (std::size_t p = 0; p < values_.size(); ++p) {
    auto dst = values_[p].flat();
    auto src = other.values_[p].flat();
    require(dst.size() == src.size(), "ParamStore::axpy: shape mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
  }
}

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kAffine: return "affine";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "elemwise_mul";
    case OpKind::kScalarMul: return "scalar_mul";
    case OpKind::kNonlin: return "pointwise_nonlin";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kConcat: return "concat";
    case OpKind::kSelect: return "select";
    case OpKind::kDot: return "dot";
  }
  return "?";
}

NodeId TracedGraph::push(Node node) {
  for (NodeId in : node.inputs) require(in < nodes_.size(), "TracedGraph: unknown input node");
  node.value = compute(node);
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Vec TracedGraph::compute(const Node& n) const {
  auto in = [&](std::size_t i) -> const Vec& { return nodes_[n.inputs[i]].value; };
  switch (n.kind) {
    case OpKind::kLeaf:
      if (n.table != kNoParam) {
        auto r = params_->at(n.table).row(n.row);
        return Vec(r.begin(), r.end());
      }
      return n.value;
    case OpKind::kAffine: {
      require(!n.weights.empty() && n.weights.size() == n.inputs.size(),
              "affine: one weight per input block");
      Vec z(params_->at(n.weights[0]).rows(), 0.0);
      for (std::size_t m = 0; m < n.weights.size(); ++m) {
        kernels::matvec_acc(params_->at(n.weights[m]), in(m), z);
      }
      if (n.bias != kNoParam) {
        auto b = params_->at(n.bias).flat();
        require(b.size() == z.size(), "affine: bias dimension mismatch");
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += b[i];
      }
      return z;
    }
    case OpKind::kAdd: {
      Vec z = in(0);
      for (std::size_t m = 1; m < n.inputs.size(); ++m) {
        const Vec& t = in(m);
        require(t.size() == z.size(), "add: dimension mismatch");
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += t[i];
      }
      return z;
    }
    case OpKind::kSub: {
      const Vec& a = in(0);
      const Vec& b = in(1);
      require(a.size() == b.size(), "sub: dimension mismatch");
      Vec z(a.size());
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = a[i] - b[i];
      return z;
    }
    case OpKind::kMul: {
      const Vec& a = in(0);
      const Vec& b = in(1);
      require(a.size() == b.size(), "mul: dimension mismatch");
      Vec z(a.size());
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = a[i] * b[i];
      return z;
    }
    case OpKind::kScalarMul: {
      double s = n.scalar;
      if (n.inputs.size() == 2) {
        require(in(1).size() == 1, "scalar_mul: factor must be a single element");
        s = in(1)[0];
      }
      Vec z = in(0);
      for (double& v : z) v *= s;
      return z;
    }
    case OpKind::kNonlin:
      return pointwise(n.nonlin, in(0));
    case OpKind::kSoftmax:
      return confparse::softmax(in(0));
    case OpKind::kConcat: {
      Vec z;
      for (std::size_t m = 0; m < n.inputs.size(); ++m) z.insert(z.end(), in(m).begin(), in(m).end());
      return z;
    }
    case OpKind::kSelect: {
      const Vec& x = in(0);
      Vec z(n.indices.size());
      for (std::size_t j = 0; j < z.size(); ++j) {
        require(n.indices[j] < x.size(), "select: index out of range");
        z[j] = x[n.indices[j]];
      }
      return z;
    }
    case OpKind::kDot: {
      const Vec& q = in(0);
      Vec z(n.inputs.size() - 1);
      for (std::size_t k = 0; k + 1 < n.inputs.size(); ++k) z[k] = kernels::dot(q, in(k + 1));
      return z;
    }
  }
  throw Error("TracedGraph: unknown op kind");
}

NodeId TracedGraph::leaf(Vec value, LeafKind kind, int position) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.value = std::move(value);
  n.leaf = kind;
  n.position = position;
  return push(std::move(n));
}

NodeId TracedGraph::embedding(ParamId table, std::size_t row, LeafKind kind, int position) {
  require(row < params_->at(table).rows(), "embedding: row out of range");
  Node n;
  n.kind = OpKind::kLeaf;
  n.table = table;
  n.row = row;
  n.leaf = kind;
  n.position = position;
  return push(std::move(n));
}

NodeId TracedGraph::affine(std::span<const ParamId> weights, std::span<const NodeId> inputs,
                           ParamId bias) {
  Node n;
  n.kind = OpKind::kAffine;
  n.weights.assign(weights.begin(), weights.end());
  n.inputs.assign(inputs.begin(), inputs.end());
  n.bias = bias;
  return push(std::move(n));
}

NodeId TracedGraph::affine(ParamId weight, NodeId x, ParamId bias) {
  return affine(std::span<const ParamId>(&weight, 1), std::span<const NodeId>(&x, 1), bias);
}

NodeId TracedGraph::add(NodeId a, NodeId b) {
  const NodeId terms[] = {a, b};
  return add(terms);
}

NodeId TracedGraph::add(std::span<const NodeId> terms) {
  require(terms.size() >= 2, "add: need at least two terms");
  Node n;
  n.kind = OpKind::kAdd;
  n.inputs.assign(terms.begin(), terms.end());
  return push(std::move(n));
}

NodeId TracedGraph::sub(NodeId a, NodeId b) {
  Node n;
  n.kind = OpKind::kSub;
  n.inputs = {a, b};
  return push(std::move(n));
}

NodeId TracedGraph::mul(NodeId a, NodeId b) {
  Node n;
  n.kind = OpKind::kMul;
  n.inputs = {a, b};
  return push(std::move(n));
}

NodeId TracedGraph::scalar_mul(NodeId x, NodeId factor) {
  Node n;
  n.kind = OpKind::kScalarMul;
  n.inputs = {x, factor};
  return push(std::move(n));
}

NodeId TracedGraph::scalar_mul(NodeId x, double factor) {
  Node n;
  n.kind = OpKind::kScalarMul;
  n.inputs = {x};
  n.scalar = factor;
  return push(std::move(n));
}

NodeId TracedGraph::nonlin(Nonlinearity f, NodeId x) {
  Node n;
  n.kind = OpKind::kNonlin;
  n.nonlin = f;
  n.inputs = {x};
  return push(std::move(n));
}

NodeId TracedGraph::softmax(NodeId x) {
  Node n;
  n.kind = OpKind::kSoftmax;
  n.inputs = {x};
  return push(std::move(n));
}

NodeId TracedGraph::concat(std::span<const NodeId> parts) {
  require(!parts.empty(), "concat: no parts");
  Node n;
  n.kind = OpKind::kConcat;
  n.inputs.assign(parts.begin(), parts.end());
  return push(std::move(n));
}

NodeId TracedGraph::select(NodeId x, std::vector<std::size_t> indices) {
  Node n;
  n.kind = OpKind::kSelect;
  n.inputs = {x};
  n.indices = std::move(indices);
  return push(std::move(n));
}

NodeId TracedGraph::dot(NodeId query, std::span<const NodeId> keys) {
  require(!keys.empty(), "dot: no keys");
  Node n;
  n.kind = OpKind::kDot;
  n.inputs.reserve(keys.size() + 1);
  n.inputs.push_back(query);
  n.inputs.insert(n.inputs.end(), keys.begin(), keys.end());
  return push(std::move(n));
}

void TracedGraph::backward(std::span<const std::pair<NodeId, Vec>> seeds,
                           ParamStore& grads) const {
  std::vector<Vec> g(nodes_.size());
  auto grad_of = [&](NodeId id) -> Vec& {
    Vec& v = g[id];
    if (v.empty()) v.assign(nodes_[id].value.size(), 0.0);
    return v;
  };
  for (const auto& [id, seed] : seeds) {
    require(id < nodes_.size() && seed.size() == nodes_[id].value.size(),
            "backward: seed does not match node");
    Vec& dst = grad_of(id);
    for (std::size_t i = 0; i < seed.size(); ++i) dst[i] += seed[i];
  }

  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    if (g[idx].empty()) continue;
    const Vec& dz = g[idx];
    const Node& n = nodes_[idx];
    switch (n.kind) {
      case OpKind::kLeaf:
        if (n.table != kNoParam) {
          auto r = grads.at(n.table).row(n.row);
          for (std::size_t i = 0; i < dz.size(); ++i) r[i] += dz[i];
        }
        break;
      case OpKind::kAffine:
        for (std::size_t m = 0; m < n.weights.size(); ++m) {
          const NodeId x = n.inputs[m];
          kernels::outer_acc(grads.at(n.weights[m]), dz, nodes_[x].value);
          kernels::matvec_transpose_acc(params_->at(n.weights[m]), dz, grad_of(x));
        }
        if (n.bias != kNoParam) {
          auto b = grads.at(n.bias).flat();
          for (std::size_t i = 0; i < dz.size(); ++i) b[i] += dz[i];
        }
        break;
      case OpKind::kAdd:
        for (NodeId in : n.inputs) {
          Vec& d = grad_of(in);
          for (std::size_t i = 0; i < dz.size(); ++i) d[i] += dz[i];
        }
        break;
      case OpKind::kSub: {
        Vec& da = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < dz.size(); ++i) da[i] += dz[i];
        Vec& db = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < dz.size(); ++i) db[i] -= dz[i];
        break;
      }
      case OpKind::kMul: {
        const Vec& a = nodes_[n.inputs[0]].value;
        const Vec& b = nodes_[n.inputs[1]].value;
        Vec& da = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < dz.size(); ++i) da[i] += dz[i] * b[i];
        Vec& db = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < dz.size(); ++i) db[i] += dz[i] * a[i];
        break;
      }
      case OpKind::kScalarMul: {
        const Vec& x = nodes_[n.inputs[0]].value;
        const double s = n.inputs.size() == 2 ? nodes_[n.inputs[1]].value[0] : n.scalar;
        Vec& dx = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < dz.size(); ++i) dx[i] += s * dz[i];
        if (n.inputs.size() == 2) grad_of(n.inputs[1])[0] += kernels::dot(dz, x);
        break;
      }
      case OpKind::kNonlin: {
        const Vec& y = n.value;
        Vec& dx = grad_of(n.inputs[0]);
        if (n.nonlin == Nonlinearity::kSigmoid) {
          for (std::size_t i = 0; i < dz.size(); ++i) dx[i] += dz[i] * y[i] * (1.0 - y[i]);
        } else {
          for (std::size_t i = 0; i < dz.size(); ++i) dx[i] += dz[i] * (1.0 - y[i] * y[i]);
        }
        break;
      }
      case OpKind::kSoftmax: {
        const Vec& y = n.value;
        const double s = kernels::dot(dz, y);
        Vec& dx = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < dz.size(); ++i) dx[i] += y[i] * (dz[i] - s);
        break;
      }
      case OpKind::kConcat: {
        std::size_t off = 0;
        for (NodeId in : n.inputs) {
          Vec& d = grad_of(in);
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += dz[off + i];
          off += d.size();
        }
        break;
      }
      case OpKind::kSelect: {
        Vec& dx = grad_of(n.inputs[0]);
        for (std::size_t j = 0; j < n.indices.size(); ++j) dx[n.indices[j]] += dz[j];
        break;
      }
      case OpKind::kDot: {
        const Vec& q = nodes_[n.inputs[0]].value;
        for (std::size_t k = 0; k + 1 < n.inputs.size(); ++k) {
          const NodeId key = n.inputs[k + 1];
          const Vec& e = nodes_[key].value;
          Vec& dq = grad_of(n.inputs[0]);
          for (std::size_t i = 0; i < q.size(); ++i) dq[i] += dz[k] * e[i];
          Vec& de = grad_of(key);
          for (std::size_t i = 0; i < q.size(); ++i) de[i] += dz[k] * q[i];
        }
        break;
      }
    }
  }
}

std::size_t TracedGraph::replay_mismatches() const {
  std::size_t bad = 0;
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::kLeaf && n.table == kNoParam) continue;
    const Vec again = compute(n);
    if (again.size() != n.value.size() ||
        std::memcmp(again.data(), n.value.data(), again.size() * sizeof(double)) != 0) {
      ++bad;
    }
  }
  return bad;
}

}  // namespace confparse
