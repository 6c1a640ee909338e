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

#include "confparse/scorer/boosting.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "confparse/core/tensor.h"
#include "confparse/eval/stats.h"

namespace confparse {
namespace {

constexpr double kMinGain = 1e-12;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

struct Stats {
  double g = 0.0;
  double h = 0.0;
};

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  bool default_left = false;
  double gain = 0.0;
};

double score_term(const Stats& s, double lambda) { return s.g * s.g / (s.h + lambda); }

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> x, std::span<const double> grad,
              std::span<const double> hess, std::span<const std::size_t> features,
              const ScorerConfig& cfg)
      : x_(x), grad_(grad), hess_(hess), features_(features), cfg_(cfg) {}

  // `sample` picks the rows that shape the tree; `all` are the rows whose
  // statistics set each leaf's weight.
  RegressionTree build(std::vector<std::size_t> sample, std::vector<std::size_t> all) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(sample), std::move(all), 0);
    return tree;
  }

 private:
  bool goes_left(const TreeNode& n, const FeatureVector& v) const {
    const auto f = static_cast<std::size_t>(n.feature);
    if (v.missing[f]) return n.default_left;
    return v.values[f] < n.threshold;
  }

  Stats totals(const std::vector<std::size_t>& rows) const {
    Stats s;
    for (std::size_t r : rows) {
      s.g += grad_[r];
      s.h += hess_[r];
    }
    return s;
  }

  Split best_split(const std::vector<std::size_t>& rows) const {
    const Stats total = totals(rows);
    const double parent = score_term(total, cfg_.lambda);
    Split best;
    std::vector<std::size_t> present;
    for (std::size_t f : features_) {
      present.clear();
      Stats miss;
      for (std::size_t r : rows) {
        if (x_[r].missing[f]) {
          miss.g += grad_[r];
          miss.h += hess_[r];
        } else {
          present.push_back(r);
        }
      }
      std::stable_sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
        return x_[a].values[f] < x_[b].values[f];
      });
      Stats left;
      for (std::size_t i = 0; i + 1 < present.size(); ++i) {
        left.g += grad_[present[i]];
        left.h += hess_[present[i]];
        const double lo = x_[present[i]].values[f];
        const double hi = x_[present[i + 1]].values[f];
        if (!(lo < hi)) continue;
        for (int dir = 0; dir < 2; ++dir) {
          const bool default_left = dir == 0;
          Stats l = left;
          if (default_left) {
            l.g += miss.g;
            l.h += miss.h;
          }
          const Stats r{total.g - l.g, total.h - l.h};
          if (l.h < cfg_.min_child_weight || r.h < cfg_.min_child_weight) continue;
          const double gain =
              0.5 * (score_term(l, cfg_.lambda) + score_term(r, cfg_.lambda) - parent) - cfg_.gamma;
          if (gain > kMinGain && (!best.found || gain > best.gain)) {
            best.found = true;
            best.feature = static_cast<int>(f);
            best.threshold = lo + 0.5 * (hi - lo);
            best.default_left = default_left;
            best.gain = gain;
          }
        }
      }
    }
    return best;
  }

  void grow(RegressionTree& tree, std::size_t id, std::vector<std::size_t> sample,
            std::vector<std::size_t> all, int depth) {
    Split split;
    if (depth < cfg_.max_depth && sample.size() >= 2) split = best_split(sample);
    if (!split.found) {
      const Stats s = totals(all);
      tree.nodes[id].weight = -s.g / (s.h + cfg_.lambda) * cfg_.learning_rate;
      return;
    }
    TreeNode& node = tree.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.default_left = split.default_left;
    node.gain = split.gain;
    std::vector<std::size_t> sl, sr, al, ar;
    for (std::size_t r : sample) (goes_left(node, x_[r]) ? sl : sr).push_back(r);
    for (std::size_t r : all) (goes_left(node, x_[r]) ? al : ar).push_back(r);
    const auto left = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.nodes[id].left = static_cast<int>(left);
    tree.nodes[id].right = static_cast<int>(left + 1);
    grow(tree, left, std::move(sl), std::move(al), depth + 1);
    grow(tree, left + 1, std::move(sr), std::move(ar), depth + 1);
  }

  std::span<const FeatureVector> x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::span<const std::size_t> features_;
  const ScorerConfig& cfg_;
};

void check_config(const ScorerConfig& c) {
  require(c.n_trees >= 0, "scorer: n_trees must be >= 0");
  require(c.max_depth >= 0, "scorer: max_depth must be >= 0");
  require(c.subsample > 0.0 && c.subsample <= 1.0, "scorer: subsample must be in (0, 1]");
  require(c.learning_rate > 0.0, "scorer: learning_rate must be > 0");
  require(c.lambda >= 0.0 && c.gamma >= 0.0 && c.min_child_weight >= 0.0,
          "scorer: negative regularisation");
}

nlohmann::json config_to_json(const ScorerConfig& c) {
  return {{"n_trees", c.n_trees},         {"max_depth", c.max_depth},
          {"subsample", c.subsample},     {"learning_rate", c.learning_rate},
          {"lambda", c.lambda},           {"gamma", c.gamma},
          {"min_child_weight", c.min_child_weight}, {"seed", c.seed}};
}

ScorerConfig config_from_json(const nlohmann::json& j) {
  ScorerConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.subsample = j.at("subsample").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.min_child_weight = j.at("min_child_weight").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_loss(std::span<const double> margins, std::span<const double> targets) {
  require(margins.size() == targets.size() && !margins.empty(), "logistic_loss: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    total += targets[i] * softplus(-margins[i]) + (1.0 - targets[i]) * softplus(margins[i]);
  }
  return total / static_cast<double>(margins.size());
}

std::uint64_t names_hash(std::span<const std::string> names) {
  FeatureSchema s;
  s.names.assign(names.begin(), names.end());
  return s.hash();
}

double RegressionTree::output(const FeatureVector& x) const {
  std::size_t id = 0;
  while (nodes[id].feature >= 0) {
    const TreeNode& n = nodes[id];
    const auto f = static_cast<std::size_t>(n.feature);
    const bool left = x.missing[f] ? n.default_left : x.values[f] < n.threshold;
    id = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[id].weight;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

BoostedModel::BoostedModel(std::vector<std::string> feature_names, ScorerConfig config,
                           double base_score)
    : names_(std::move(feature_names)),
      hash_(names_hash(names_)),
      config_(config),
      base_(base_score) {}

void BoostedModel::check(const FeatureVector& x) const {
  require(x.values.size() == names_.size() && x.missing.size() == names_.size(),
          "scorer: feature vector does not match the model schema");
}

double BoostedModel::margin(const FeatureVector& x) const {
  check(x);
  double s = base_;
  for (const RegressionTree& t : trees_) s += t.output(x);
  return s;
}

double BoostedModel::predict(const FeatureVector& x) const {
  // Keep the result strictly inside (0, 1) even for saturated margins.
  const double p = logistic(margin(x));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

nlohmann::json BoostedModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& t : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                       {"default_left", n.default_left}, {"left", n.left},
                       {"right", n.right}, {"weight", n.weight}, {"gain", n.gain}});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", "confparse-scorer"}, {"version", 1},
          {"schema_hash", hex64(hash_)},   {"features", names_},
          {"config", config_to_json(config_)}, {"base_score", base_},
          {"training_loss", loss_},        {"trees", std::move(trees)}};
}

BoostedModel BoostedModel::from_json(const nlohmann::json& j) {
  require(j.value("format", "") == "confparse-scorer", "scorer: not a scorer file");
  require(j.value("version", 0) == 1, "scorer: unsupported version");
  BoostedModel m(j.at("features").get<std::vector<std::string>>(),
                 config_from_json(j.at("config")), j.at("base_score").get<double>());
  require(hex64(m.hash_) == j.at("schema_hash").get<std::string>(),
          "scorer: schema hash mismatch");
  m.loss_ = j.at("training_loss").get<std::vector<double>>();
  for (const auto& jt : j.at("trees")) {
    RegressionTree t;
    for (const auto& jn : jt) {
      TreeNode n;
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.default_left = jn.at("default_left").get<bool>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      n.weight = jn.at("weight").get<double>();
      n.gain = jn.at("gain").get<double>();
      const auto size = static_cast<int>(jt.size());
      require(n.feature < static_cast<int>(m.names_.size()), "scorer: bad feature index");
      require(n.feature < 0 || (n.left > 0 && n.left < size && n.right > 0 && n.right < size),
              "scorer: bad child index");
      t.nodes.push_back(n);
    }
    require(!t.nodes.empty(), "scorer: empty tree");
    m.trees_.push_back(std::move(t));
  }
  return m;
}

BoostedModel fit_scorer(std::span<const FeatureVector> features, std::span<const double> targets,
                        const ScorerConfig& config, std::span<const std::string> feature_names,
                        std::span<const std::size_t> active) {
  check_config(config);
  require(features.size() == targets.size(), "fit_scorer: feature/target count mismatch");
  require(features.size() >= 10, "fit_scorer: need at least 10 examples");
  const std::size_t dims = feature_names.size();
  for (const FeatureVector& f : features) {
    require(f.values.size() == dims && f.missing.size() == dims,
            "fit_scorer: feature vector does not match the schema");
  }
  for (double y : targets) require(y >= 0.0 && y <= 1.0, "fit_scorer: target outside [0, 1]");
  std::vector<std::size_t> cols;
  if (active.empty()) {
    cols.resize(dims);
    std::iota(cols.begin(), cols.end(), 0);
  } else {
    cols.assign(active.begin(), active.end());
    for (std::size_t c : cols) require(c < dims, "fit_scorer: active feature out of range");
  }

  const std::size_t n = features.size();
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  const double p0 = std::clamp(mean, 1e-6, 1.0 - 1e-6);
  BoostedModel model({feature_names.begin(), feature_names.end()}, config,
                     std::log(p0 / (1.0 - p0)));

  std::vector<double> margins(n, model.base_score());
  model.mutable_training_loss().push_back(logistic_loss(margins, targets));
  const bool constant = std::all_of(targets.begin(), targets.end(),
                                    [&](double y) { return y == targets[0]; });
  if (constant) return model;

  std::vector<double> grad(n), hess(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const RngStream root(config.seed);
  for (int round = 0; round < config.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(margins[i]);
      grad[i] = p - targets[i];
      hess[i] = p * (1.0 - p);
    }
    std::vector<std::size_t> sample;
    if (config.subsample >= 1.0) {
      sample = all;
    } else {
      RngStream rng = root.fork(static_cast<std::uint64_t>(round));
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(config.subsample)) sample.push_back(i);
      }
    }
    TreeBuilder builder(features, grad, hess, cols, config);
    RegressionTree tree = builder.build(std::move(sample), all);
    for (std::size_t i = 0; i < n; ++i) margins[i] += tree.output(features[i]);
    model.mutable_trees().push_back(std::move(tree));
    model.mutable_training_loss().push_back(logistic_loss(margins, targets));
  }
  return model;
}

BoostedModel fit_scorer(std::span<const FeatureVector> features, std::span<const double> targets,
                        const ScorerConfig& config) {
  return fit_scorer(features, targets, config, confidence_schema().names);
}

std::vector<double> feature_importance(const BoostedModel& model) {
  const std::size_t dims = model.feature_names().size();
  std::vector<double> sum(dims, 0.0), count(dims, 0.0);
  for (const RegressionTree& t : model.trees()) {
    for (const TreeNode& n : t.nodes) {
      if (n.feature < 0) continue;
      sum[static_cast<std::size_t>(n.feature)] += n.gain;
      count[static_cast<std::size_t>(n.feature)] += 1.0;
    }
  }
  std::vector<double> mean(dims, 0.0);
  for (std::size_t f = 0; f < dims; ++f) {
    if (count[f] > 0) mean[f] = sum[f] / count[f];
  }
  const double top = *std::max_element(mean.begin(), mean.end());
  if (top > 0) {
    for (double& v : mean) v /= top;
  }
  return mean;
}

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed) {
  require(folds >= 2 && static_cast<std::size_t>(folds) <= n, "assign_folds: infeasible folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    fold[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold;
}

CrossValidation cross_validate(std::span<const FeatureVector> features,
                               std::span<const double> targets, const ScorerGrid& grid,
                               const ScorerConfig& base, int folds,
                               std::span<const std::string> feature_names,
                               std::span<const std::size_t> active) {
  require(!grid.n_trees.empty() && !grid.max_depth.empty(), "cross_validate: empty grid");
  require(features.size() == targets.size(), "cross_validate: size mismatch");
  const std::vector<int> fold = assign_folds(features.size(), folds, base.seed);
  CrossValidation cv;
  for (int trees : grid.n_trees) {
    for (int depth : grid.max_depth) {
      ScorerConfig c = base;
      c.n_trees = trees;
      c.max_depth = depth;
      cv.configs.push_back(c);
    }
  }
  for (const ScorerConfig& c : cv.configs) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<FeatureVector> tx, vx;
      std::vector<double> ty, vy;
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (fold[i] == f) {
          vx.push_back(features[i]);
          vy.push_back(targets[i]);
        } else {
          tx.push_back(features[i]);
          ty.push_back(targets[i]);
        }
      }
      const BoostedModel m = fit_scorer(tx, ty, c, feature_names, active);
      std::vector<double> pred;
      for (const FeatureVector& v : vx) pred.push_back(m.predict(v));
      // A fold where either side is constant carries no ranking signal.
      const Correlation rho = vx.size() >= 3 ? spearman(pred, vy) : Correlation{};
      total += rho.defined ? rho.rho : 0.0;
    }
    cv.scores.push_back(total / folds);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cv.scores.size(); ++i) {
    if (cv.scores[i] > cv.scores[best]) best = i;
  }
  cv.best = cv.configs[best];
  return cv;
}

void save_scorer(const BoostedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "save_scorer: cannot write " + path.string());
  out << model.to_json().dump(1) << '\n';
  require(static_cast<bool>(out), "save_scorer: write failed for " + path.string());
}

BoostedModel load_scorer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "load_scorer: cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("load_scorer: " + std::string(e.what()));
  }
  return BoostedModel::from_json(j);
}

}  // namespace confparse
