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

#include "confparse/eval/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confparse/metrics/metrics.h"
#include "confparse/perturb/perturb.h"

namespace confparse {
namespace {

bool is_open(const std::string& t) { return t == "("; }
bool is_close(const std::string& t) { return t == ")"; }

// Parses the items between pos and the matching close bracket (or the end
// when top_level), recording one production per bracketed symbol.
bool parse_items(std::span<const std::string> mr, std::size_t& pos, const std::string& parent,
                 bool top_level, std::set<std::string>& out) {
  std::string rhs;
  std::size_t items = 0;
  while (pos < mr.size() && !is_close(mr[pos])) {
    if (is_open(mr[pos])) return false;  // bracket without a head symbol
    const std::string& sym = mr[pos++];
    rhs += (items++ ? " " : "") + sym;
    if (pos < mr.size() && is_open(mr[pos])) {
      ++pos;
      if (!parse_items(mr, pos, sym, false, out)) return false;
      if (pos >= mr.size() || !is_close(mr[pos])) return false;
      ++pos;
    }
  }
  if (top_level && pos != mr.size()) return false;  // stray close bracket
  if (!top_level && pos >= mr.size()) return false;  // unclosed bracket
  out.insert(parent + " -> " + rhs);
  return true;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double rho_or_zero(std::span<const double> a, std::span<const double> b) {
  const Correlation c = spearman(a, b);
  return c.defined ? c.rho : 0.0;
}

}  // namespace

std::optional<std::set<std::string>> extract_productions(std::span<const std::string> mr) {
  std::set<std::string> out;
  std::size_t pos = 0;
  if (!parse_items(mr, pos, "ROOT", true, out)) return std::nullopt;
  return out;
}

F1Result f1(std::span<const std::string> pred, std::span<const std::string> gold, F1Mode mode) {
  const bool same =
      pred.size() == gold.size() && std::equal(pred.begin(), pred.end(), gold.begin());
  F1Result r;
  if (mode == F1Mode::kExact) {
    r.value = same ? 1.0 : 0.0;
    return r;
  }
  const auto p = extract_productions(pred);
  const auto g = extract_productions(gold);
  if (!p || !g) {
    r.fell_back = true;
    r.value = same ? 1.0 : 0.0;
    return r;
  }
  if (same) {
    r.value = 1.0;
    return r;
  }
  std::size_t common = 0;
  for (const std::string& x : *p) common += g->count(x);
  if (common == 0) return r;
  const double precision = static_cast<double>(common) / static_cast<double>(p->size());
  const double recall = static_cast<double>(common) / static_cast<double>(g->size());
  r.value = 2.0 * precision * recall / (precision + recall);
  return r;
}

std::vector<CoveragePoint> coverage_curve(std::span<const double> scores,
                                          std::span<const double> f1s, int points) {
  require(scores.size() == f1s.size(), "coverage_curve: size mismatch");
  require(points >= 1, "coverage_curve: need at least one point");
  std::vector<CoveragePoint> curve;
  if (scores.empty()) return curve;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> thresholds = {-std::numeric_limits<double>::infinity()};
  for (int j = 1; j < points; ++j) {
    thresholds.push_back(quantile(sorted, static_cast<double>(j) / points));
  }
  const double n = static_cast<double>(scores.size());
  std::size_t last_count = 0;
  for (double thr : thresholds) {
    std::size_t count = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= thr) {
        ++count;
        sum += f1s[i];
      }
    }
    // Thresholds in the same gap between scores select the same subset.
    if (count == 0 || (!curve.empty() && count == last_count)) continue;
    last_count = count;
    curve.push_back({thr, static_cast<double>(count) / n, sum / static_cast<double>(count)});
  }
  std::reverse(curve.begin(), curve.end());
  return curve;
}

std::vector<CoveragePoint> isotonic_smooth(std::span<const CoveragePoint> curve) {
  // Fit non-decreasing values along decreasing coverage, i.e. from the end
  // of the curve towards its front.
  struct Block {
    double sum;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = curve.size(); i-- > 0;) {
    blocks.push_back({curve[i].f1, 1.0, 1});
    while (blocks.size() >= 2) {
      Block& b = blocks[blocks.size() - 1];
      Block& a = blocks[blocks.size() - 2];
      if (a.sum / a.weight <= b.sum / b.weight) break;
      a.sum += b.sum;
      a.weight += b.weight;
      a.count += b.count;
      blocks.pop_back();
    }
  }
  std::vector<CoveragePoint> out(curve.begin(), curve.end());
  std::size_t i = curve.size();
  for (const Block& b : blocks) {
    for (std::size_t k = 0; k < b.count; ++k) out[--i].f1 = b.sum / b.weight;
  }
  return out;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

Overlap overlap_at_k(std::span<const double> a, std::span<const double> b, std::size_t k) {
  require(a.size() == b.size(), "overlap_at_k: scorings differ in length");
  require(k >= 1, "overlap_at_k: K must be positive");
  Overlap o;
  o.clamped = k > a.size();
  o.k = std::min(k, a.size());
  if (o.k == 0) return o;
  std::vector<std::size_t> ta = top_k(a, o.k), tb = top_k(b, o.k);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::size_t> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  o.value = static_cast<double>(common.size()) / static_cast<double>(o.k);
  return o;
}

double list_overlap(std::span<const std::string> a, std::span<const std::string> b) {
  require(a.size() == b.size() && !a.empty(), "list_overlap: lists must share a nonzero K");
  std::set<std::string> sa(a.begin(), a.end());
  std::size_t common = 0;
  for (const std::string& x : std::set<std::string>(b.begin(), b.end())) common += sa.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size());
}

std::vector<double> proxy_gold(const Seq2SeqModel& model, std::span<const TokenId> source,
                               std::span<const TokenId> target, double sigma, int passes,
                               std::uint64_t seed) {
  require(sigma >= 0.0, "proxy_gold: sigma must be non-negative");
  std::vector<double> out;
  const RngStream root(seed);
  for (std::size_t t = 0; t < source.size(); ++t) {
    const std::uint64_t s = root.fork(t).next_u64();
    out.push_back(seq_variance(
        per_token_noise_passes(model, source, target, static_cast<int>(t), sigma, passes, s)));
  }
  return out;
}

CorrelationMatrix correlation_matrix(std::span<const std::string> names,
                                     std::span<const std::vector<double>> columns) {
  require(names.size() == columns.size() && !columns.empty(), "correlation_matrix: bad columns");
  const std::size_t n = columns.size();
  for (const auto& c : columns) {
    require(c.size() == columns[0].size(), "correlation_matrix: ragged columns");
  }
  require(columns[0].size() >= 3, "correlation_matrix: need at least 3 examples");
  CorrelationMatrix m{{names.begin(), names.end()}, Mat(n, n), std::vector<std::uint8_t>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Correlation c = spearman(columns[i], columns[j]);
      m.rho(i, j) = m.rho(j, i) = c.rho;
      m.defined[i * n + j] = m.defined[j * n + i] = c.defined ? 1 : 0;
    }
  }
  return m;
}

BootstrapResult bootstrap_rho_difference(std::span<const double> a, std::span<const double> b,
                                         std::span<const double> f1s, int resamples,
                                         std::uint64_t seed) {
  require(a.size() == b.size() && a.size() == f1s.size() && a.size() >= 3,
          "bootstrap: need aligned lists of at least 3 examples");
  require(resamples >= 1, "bootstrap: need at least one resample");
  BootstrapResult r;
  r.resamples = resamples;
  r.delta = rho_or_zero(a, f1s) - rho_or_zero(b, f1s);
  const std::size_t n = a.size();
  RngStream rng(seed);
  std::vector<double> ra(n), rb(n), rf(n);
  int not_better = 0;
  for (int s = 0; s < resamples; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rng.below(n);
      ra[i] = a[k];
      rb[i] = b[k];
      rf[i] = f1s[k];
    }
    if (rho_or_zero(ra, rf) - rho_or_zero(rb, rf) <= 0.0) ++not_better;
  }
  r.p_value = (1.0 + not_better) / (1.0 + resamples);
  return r;
}

nlohmann::json coverage_to_json(std::span<const CoveragePoint> curve) {
  nlohmann::json j = nlohmann::json::array();
  for (const CoveragePoint& p : curve) {
    // JSON has no infinity; the full-coverage threshold is written as null.
    nlohmann::json thr = std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json();
    j.push_back({{"threshold", thr}, {"coverage", p.coverage}, {"f1", p.f1}});
  }
  return j;
}

std::vector<CoveragePoint> coverage_from_json(const nlohmann::json& j) {
  std::vector<CoveragePoint> out;
  for (const auto& p : j) {
    CoveragePoint c;
    c.threshold = p.at("threshold").is_null() ? -std::numeric_limits<double>::infinity()
                                              : p.at("threshold").get<double>();
    c.coverage = p.at("coverage").get<double>();
    c.f1 = p.at("f1").get<double>();
    out.push_back(c);
  }
  return out;
}

nlohmann::json correlation_to_json(const CorrelationMatrix& m) {
  const std::size_t n = m.names.size();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < n; ++j) {
      row.push_back(m.defined[i * n + j] ? nlohmann::json(m.rho(i, j)) : nlohmann::json());
    }
    rows.push_back(std::move(row));
  }
  return {{"names", m.names}, {"rho", std::move(rows)}};
}

CorrelationMatrix correlation_from_json(const nlohmann::json& j) {
  CorrelationMatrix m;
  m.names = j.at("names").get<std::vector<std::string>>();
  const std::size_t n = m.names.size();
  m.rho = Mat(n, n);
  m.defined.assign(n * n, 0);
  const auto& rows = j.at("rho");
  require(rows.size() == n, "correlation matrix: shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    require(rows[i].size() == n, "correlation matrix: shape mismatch");
    for (std::size_t jx = 0; jx < n; ++jx) {
      if (rows[i][jx].is_null()) continue;
      m.rho(i, jx) = rows[i][jx].get<double>();
      m.defined[i * n + jx] = 1;
    }
  }
  return m;
}

}  // namespace confparse
