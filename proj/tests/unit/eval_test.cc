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
#include <limits>

#include <gtest/gtest.h>

#include "confparse/eval/eval.h"
#include "confparse/eval/stats.h"
#include "test_models.h"

namespace confparse {
namespace {

using V = std::vector<double>;

TEST(Spearman, HandCases) {
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 3, 4}, V{10, 20, 30, 40}).rho, 1.0);
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 3, 4}, V{4, 3, 2, 1}).rho, -1.0);
  EXPECT_NEAR(spearman(V{1, 2, 3, 4}, V{1, 3, 2, 4}).rho, 0.8, 1e-15);
}

TEST(Spearman, ConstantInputIsUndefined) {
  const Correlation c = spearman(V{1, 2, 3}, V{5, 5, 5});
  EXPECT_FALSE(c.defined);
  EXPECT_EQ(c.rho, 0.0);
}

TEST(Spearman, TiesUseAverageRanks) {
  EXPECT_EQ(average_ranks(V{3, 1, 3, 2}), (V{3.5, 1, 3.5, 2}));
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  RngStream rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    V x(30), y(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.uniform();
      y[i] = x[i] + 0.3 * rng.normal();
    }
    V tx = x, ty = y;
    for (double& v : tx) v = std::exp(3 * v);
    for (double& v : ty) v = std::atan(v) * 5 - 7;
    const double rho = spearman(x, y).rho;
    EXPECT_GE(rho, -1.0);
    EXPECT_LE(rho, 1.0);
    EXPECT_NEAR(spearman(tx, ty).rho, rho, 1e-12);
  }
}

Tokens toks(const std::string& s) { return tokenize(s); }

TEST(F1, ExactAndProductionModes) {
  const Tokens a = toks("x ( a ) y ( b )");
  EXPECT_EQ(f1(a, a, F1Mode::kExact).value, 1.0);
  EXPECT_EQ(f1(a, a, F1Mode::kProductionSet).value, 1.0);
  EXPECT_NEAR(f1(a, toks("x ( a ) y ( c )"), F1Mode::kProductionSet).value, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(f1(a, toks("x ( a ) y ( c )"), F1Mode::kExact).value, 0.0);
  EXPECT_EQ(f1(toks("p ( q )"), toks("r ( s t )"), F1Mode::kProductionSet).value, 0.0);
}

TEST(F1, ProductionsOfANestedMr) {
  const auto p = extract_productions(toks("t.f ( area ( home ) ) THEN h.on ( )"));
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(*p, (std::set<std::string>{"ROOT -> t.f THEN h.on", "t.f -> area", "area -> home",
                                       "h.on -> "}));
}

TEST(F1, UnbalancedFallsBackToExact) {
  const Tokens bad = toks("x ( a");
  EXPECT_FALSE(extract_productions(bad).has_value());
  EXPECT_FALSE(extract_productions(toks("x ) a")).has_value());
  const F1Result r = f1(bad, toks("x ( a )"), F1Mode::kProductionSet);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(f1(bad, bad, F1Mode::kProductionSet).value, 1.0);
}

TEST(Coverage, FullCoverageIsCorpusMean) {
  const V scores = {0.1, 0.5, 0.3, 0.9}, f = {0, 1, 0.5, 1};
  const auto curve = coverage_curve(scores, f, 4);
  ASSERT_FALSE(curve.empty());
  EXPECT_EQ(curve.back().threshold, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(curve.back().coverage, 1.0);
  EXPECT_NEAR(curve.back().f1, 0.625, 1e-15);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GT(curve[i - 1].threshold, curve[i].threshold);
    EXPECT_LT(curve[i - 1].coverage, curve[i].coverage);
  }
}

TEST(Coverage, SingleExampleGivesOnePoint) {
  const auto curve = coverage_curve(V{0.4}, V{0.7}, 20);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].coverage, 1.0);
  EXPECT_EQ(curve[0].f1, 0.7);
}

TEST(Coverage, OracleScoresGiveMonotoneCurve) {
  RngStream rng(2);
  V f(200);
  for (double& v : f) v = std::round(rng.uniform() * 4) / 4;
  const auto curve = coverage_curve(f, f, 20);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GE(curve[i - 1].f1, curve[i].f1);
}

TEST(Coverage, IsotonicSmoothingIsMonotoneAndPreservesMass) {
  RngStream rng(3);
  V s(100), f(100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    f[i] = rng.uniform() < 0.3 + 0.5 * s[i] ? 1.0 : 0.0;
  }
  const auto raw = coverage_curve(s, f, 20);
  const auto iso = isotonic_smooth(raw);
  ASSERT_EQ(iso.size(), raw.size());
  double a = 0, b = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    EXPECT_EQ(iso[i].coverage, raw[i].coverage);
    a += raw[i].f1;
    b += iso[i].f1;
    if (i > 0) EXPECT_GE(iso[i - 1].f1, iso[i].f1 - 1e-15);
  }
  EXPECT_NEAR(a, b, 1e-12);
  EXPECT_EQ(isotonic_smooth(isotonic_smooth(raw)), iso);
}

TEST(Coverage, JsonRoundTripKeepsMinusInfinity) {
  const auto curve = coverage_curve(V{0.1, 0.2, 0.3}, V{1, 0, 1}, 3);
  EXPECT_EQ(coverage_from_json(coverage_to_json(curve)), curve);
}

TEST(Overlap, ListExampleFromTheMethod) {
  const std::vector<std::string> t1 = {"q7", "q8", "q2", "q3"}, t2 = {"q7", "q8", "q3", "q4"};
  EXPECT_DOUBLE_EQ(list_overlap(t1, t2), 0.75);
}

TEST(Overlap, ScoringsIdenticalDisjointAndClamped) {
  const V a = {0.9, 0.1, 0.5, 0.3};
  EXPECT_EQ(overlap_at_k(a, a, 2).value, 1.0);
  EXPECT_EQ(overlap_at_k(a, V{0.0, 0.9, 0.1, 0.8}, 2).value, 0.0);
  const Overlap c = overlap_at_k(a, V{0.1, 0.2, 0.3, 0.4}, 10);
  EXPECT_TRUE(c.clamped);
  EXPECT_EQ(c.k, 4u);
  EXPECT_EQ(c.value, 1.0);
}

TEST(Overlap, SymmetricAndScaleInvariant) {
  RngStream rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    V a(8), b(8);
    for (std::size_t i = 0; i < 8; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    V b2 = b;
    for (double& v : b2) v *= 17.0;
    for (std::size_t k : {1, 2, 4}) {
      const double o = overlap_at_k(a, b, k).value;
      EXPECT_EQ(overlap_at_k(b, a, k).value, o);
      EXPECT_EQ(overlap_at_k(a, b2, k).value, o);
      EXPECT_GE(o, 0.0);
      EXPECT_LE(o, 1.0);
    }
  }
}

TEST(TopK, TiesGoToLowerIndex) {
  EXPECT_EQ(top_k(V{0.5, 0.9, 0.5, 0.5}, 2), (std::vector<std::size_t>{1, 0}));
}

TEST(ProxyGold, ZeroSigmaGivesZeros) {
  const Seq2SeqModel m = testing::random_model(4, 4, 3, 1);
  const std::vector<TokenId> q = {4, 5, 6}, a = {4, Vocab::kEos};
  EXPECT_EQ(proxy_gold(m, q, a, 0.0, 10, 1), V(3, 0.0));
  const V g = proxy_gold(m, q, a, 0.05, 10, 1);
  for (double v : g) EXPECT_GT(v, 0.0);
  EXPECT_EQ(proxy_gold(m, q, a, 0.05, 10, 1), g);
}

TEST(CorrelationMatrix, DuplicateColumnsAndConstantColumn) {
  const std::vector<std::string> names = {"a", "a_copy", "flat"};
  const std::vector<V> cols = {{1, 5, 2, 8}, {1, 5, 2, 8}, {3, 3, 3, 3}};
  const CorrelationMatrix m = correlation_matrix(names, cols);
  EXPECT_DOUBLE_EQ(m.rho(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.rho(0, 0), 1.0);
  EXPECT_FALSE(m.defined[0 * 3 + 2]);
  EXPECT_TRUE(m.defined[0 * 3 + 1]);
  const CorrelationMatrix back = correlation_from_json(correlation_to_json(m));
  EXPECT_EQ(back.rho, m.rho);
  EXPECT_EQ(back.defined, m.defined);
}

TEST(Bootstrap, BetterScorerGetsSmallP) {
  RngStream rng(5);
  V f(200), good(200), bad(200);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = rng.uniform();
    good[i] = f[i] + 0.1 * rng.normal();
    bad[i] = f[i] + 1.0 * rng.normal();
  }
  const BootstrapResult r = bootstrap_rho_difference(good, bad, f, 500, 1);
  EXPECT_GT(r.delta, 0.0);
  EXPECT_LT(r.p_value, 0.01);
  EXPECT_GE(r.p_value, 1.0 / 501.0);
  const BootstrapResult same = bootstrap_rho_difference(good, good, f, 100, 1);
  EXPECT_EQ(same.delta, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
}

}  // namespace
}  // namespace confparse
