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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "confparse/interpret/interpret.h"
#include "confparse/seq2seq/decode.h"
#include "test_models.h"

namespace confparse {
namespace {

double sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Rules, ProductOfThirdAndThreeSplitsEvenly) {
  ParamStore p;
  TracedGraph g(&p);
  const NodeId x = g.leaf({1.0 / 3.0}, LeafKind::kSourceWord, 0);
  const NodeId y = g.leaf({3.0}, LeafKind::kSourceWord, 1);
  const NodeId z = g.mul(x, y);
  UncertaintyState s = empty_state(g);
  s.mass[z] = {1.0};
  backprop_uncertainty(g, s);
  EXPECT_NEAR(s.mass[x][0], 0.5, 1e-15);
  EXPECT_NEAR(s.mass[y][0], 0.5, 1e-15);
  EXPECT_EQ(s.mass[z][0], 0.0);
}

TEST(Rules, ZeroAddendReceivesNothing) {
  ParamStore p;
  TracedGraph g(&p);
  const NodeId x = g.leaf({2.0}, LeafKind::kSourceWord, 0);
  const NodeId y = g.leaf({0.0}, LeafKind::kSourceWord, 1);
  const NodeId z = g.add(x, y);
  UncertaintyState s = empty_state(g);
  s.mass[z] = {0.7};
  backprop_uncertainty(g, s);
  EXPECT_EQ(s.mass[x][0], 0.7);
  EXPECT_EQ(s.mass[y][0], 0.0);
}

TEST(Rules, AffineSplitsByWeightedMagnitude) {
  ParamStore p;
  const ParamId w = p.add("w", Mat::FromRows({{1, 3}}));
  TracedGraph g(&p);
  const NodeId x = g.leaf({1.0, 1.0}, LeafKind::kSourceWord, 0);
  const NodeId z = g.affine(w, x);
  UncertaintyState s = empty_state(g);
  s.mass[z] = {2.0};
  backprop_uncertainty(g, s);
  EXPECT_NEAR(s.mass[x][0], 0.5, 1e-15);
  EXPECT_NEAR(s.mass[x][1], 1.5, 1e-15);
}

TEST(Rules, AllZeroDenominatorsNeverProduceNan) {
  ParamStore p;
  const ParamId w = p.add("w", Mat(2, 2, 0.0));
  TracedGraph g(&p);
  const NodeId x = g.leaf({0.0, 0.0}, LeafKind::kSourceWord, 0);
  const NodeId y = g.leaf({0.0, 0.0}, LeafKind::kSourceWord, 1);
  const NodeId a = g.affine(w, x);
  const NodeId m = g.mul(a, y);
  const NodeId z = g.add(m, y);
  UncertaintyState s = empty_state(g);
  s.mass[z] = {1.0, 1.0};
  backprop_uncertainty(g, s);
  for (NodeId id : {x, y}) {
    for (double v : s.mass[id]) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  }
  EXPECT_NEAR(sum(s.mass[x]) + sum(s.mass[y]), 2.0, 1e-15);
}

TEST(Rules, LeavesKeepTheirMass) {
  ParamStore p;
  TracedGraph g(&p);
  const NodeId x = g.leaf({1.0, 2.0}, LeafKind::kSourceWord, 0);
  g.nonlin(Nonlinearity::kTanh, x);
  UncertaintyState s = empty_state(g);
  s.mass[x] = {0.25, 0.5};
  backprop_uncertainty(g, s);
  EXPECT_EQ(s.mass[x], (Vec{0.25, 0.5}));
}

TEST(Init, SingleStepPlacesMassOnOneNeuron) {
  const Seq2SeqModel m = testing::random_model(4, 4, 3, 1);
  TracedGraph g(&m.params());
  const std::vector<TokenId> q = {4, 5}, a = {Vocab::kEos};
  const ForcedPass pass = teacher_forced(m, g, q, a);
  const std::vector<double> u = {0.3};
  const UncertaintyState s = init_uncertainty(g, pass, a, u);
  int nonzero = 0;
  for (NodeId id = 0; id < g.size(); ++id) {
    for (std::size_t j = 0; j < s.mass[id].size(); ++j) {
      if (s.mass[id][j] != 0.0) {
        ++nonzero;
        EXPECT_EQ(id, pass.steps[0].logits);
        EXPECT_EQ(j, Seq2SeqModel::token_to_class(Vocab::kEos));
        EXPECT_EQ(s.mass[id][j], 0.3);
      }
    }
  }
  EXPECT_EQ(nonzero, 1);
}

TEST(Backprop, MassIsConservedAndNonNegative) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Seq2SeqModel m = testing::random_model(6, 6, 5, seed);
    const std::vector<TokenId> q = {4, 7, 5, 9}, a = {5, 8, 4, Vocab::kEos};
    const std::vector<double> u = {0.01, 0.2, 0.003, 0.05};
    TracedGraph g(&m.params());
    const ForcedPass pass = teacher_forced(m, g, q, a);
    UncertaintyState s = init_uncertainty(g, pass, a, u);
    const double total = s.initial_mass;
    EXPECT_NEAR(total, 0.263, 1e-15);
    backprop_uncertainty(g, s);
    for (const Vec& v : s.mass) {
      for (double x : v) EXPECT_GE(x, 0.0);
    }
    EXPECT_NEAR(leaf_mass(g, s), total, 1e-12 * total);
    for (NodeId id = 0; id < g.size(); ++id) {
      if (g.node(id).kind != OpKind::kLeaf) EXPECT_EQ(sum(s.mass[id]), 0.0);
    }
    const UncertaintyReport r = aggregate_tokens(g, s, q.size());
    EXPECT_NEAR(sum(r.scores), 1.0, 1e-9);
    EXPECT_NEAR(sum(r.raw) / total + r.absorbed_fraction, 1.0, 1e-12);
    EXPECT_FALSE(r.zero_mass);
  }
}

TEST(Backprop, SingleSourceTokenGetsEverything) {
  const Seq2SeqModel m = testing::random_model(4, 4, 3, 2);
  const std::vector<TokenId> q = {6}, a = {4, Vocab::kEos};
  const UncertaintyReport r = interpret_backprop(m, q, a, std::vector<double>{0.1, 0.2});
  ASSERT_EQ(r.scores.size(), 1u);
  EXPECT_DOUBLE_EQ(r.scores[0], 1.0);
}

TEST(Backprop, ZeroUncertaintyFallsBackToUniform) {
  const Seq2SeqModel m = testing::random_model(4, 4, 3, 3);
  const std::vector<TokenId> q = {4, 5, 6, 7}, a = {4, Vocab::kEos};
  const UncertaintyReport r = interpret_backprop(m, q, a, std::vector<double>{0.0, 0.0});
  EXPECT_TRUE(r.zero_mass);
  for (double v : r.scores) EXPECT_EQ(v, 0.25);
}

// Every gate saturates to exactly 0 or 1 in double precision and recurrent
// weights are zero, so no mass can reach a neighbouring position except
// through forget-gate products of order 1e-18.
Seq2SeqModel isolated_positions_model(std::size_t dim, std::uint64_t seed) {
  Seq2SeqModel m = testing::peaked_attention_model(dim, seed);
  ParamStore& p = m.params();
  for (const LstmLayer* layer : {&m.encoder()[0], &m.decoder()[0]}) {
    for (int g = 0; g < 3; ++g) p.at(layer->wx[g]) = Mat::Identity(dim);
    p.at(layer->wx[3]) = Mat::Identity(dim);
    for (std::size_t j = 0; j < dim; ++j) p.at(layer->wx[3])(j, j) = 40.0;
  }
  p.at(m.decoder()[0].b[3]).fill(0.0);
  p.at(m.target_embedding()).fill(1.0);
  return m;
}

TEST(Backprop, SymmetricInputGetsEqualScores) {
  const Seq2SeqModel m = isolated_positions_model(6, 4);
  const std::vector<TokenId> q = {4, 4}, a = {6, 5, Vocab::kEos};
  const UncertaintyReport r = interpret_backprop(m, q, a, std::vector<double>{0.1, 0.3, 0.05});
  EXPECT_NEAR(r.scores[0], 0.5, 1e-9);
  EXPECT_NEAR(r.scores[1], 0.5, 1e-9);
}

TEST(Backprop, PermutingSourcePermutesScores) {
  const Seq2SeqModel m = isolated_positions_model(6, 5);
  const std::vector<TokenId> a = {6, 5, Vocab::kEos};
  const std::vector<double> u = {0.2, 0.1, 0.4};
  const std::vector<TokenId> q1 = {4, 5, 5}, q2 = {5, 5, 4};
  const UncertaintyReport r1 = interpret_backprop(m, q1, a, u);
  const UncertaintyReport r2 = interpret_backprop(m, q2, a, u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r1.scores[k], r2.scores[2 - k], 1e-9);
  EXPECT_GT(r1.scores[0], r1.scores[1]);
}

TEST(AttentionBaseline, UniformPeakedAndWeighted) {
  const std::vector<double> u2 = {0.2, 0.6};
  const UncertaintyReport uni = attention_interpretation(Mat(2, 4, 0.25), u2);
  for (double v : uni.scores) EXPECT_NEAR(v, 0.25, 1e-15);
  const UncertaintyReport peak =
      attention_interpretation(Mat::FromRows({{0, 1, 0}, {0, 1, 0}}), u2);
  EXPECT_EQ(peak.scores, (std::vector<double>{0, 1, 0}));
  const UncertaintyReport w =
      attention_interpretation(Mat::FromRows({{0.25, 0.75}}), std::vector<double>{0.4});
  EXPECT_NEAR(w.scores[0], 0.25, 1e-15);
  EXPECT_NEAR(w.scores[1], 0.75, 1e-15);
  EXPECT_THROW(attention_interpretation(Mat(3, 2, 0.5), u2), Error);
}

TEST(Report, JsonRoundTrip) {
  UncertaintyReport r = attention_interpretation(Mat::FromRows({{0.25, 0.75}}), std::vector<double>{0.4});
  r.tokens = {"turn", "on"};
  const UncertaintyReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(back.scores, r.scores);
  EXPECT_EQ(back.tokens, r.tokens);
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.zero_mass, r.zero_mass);
}

}  // namespace
}  // namespace confparse
