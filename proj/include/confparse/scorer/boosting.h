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

#ifndef CONFPARSE_SCORER_BOOSTING_H_
#define CONFPARSE_SCORER_BOOSTING_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "confparse/metrics/features.h"

namespace confparse {

struct ScorerConfig {
  int n_trees = 50;
  int max_depth = 3;
  double subsample = 0.8;
  double learning_rate = 0.1;
  double lambda = 1.0;            // L2 penalty on leaf weights
  double gamma = 0.0;             // minimum split gain
  double min_child_weight = 1.0;  // minimum hessian sum per child
  std::uint64_t seed = 0;
  bool operator==(const ScorerConfig&) const = default;
};

struct ScorerGrid {
  std::vector<int> n_trees = {20, 50};
  std::vector<int> max_depth = {3, 4, 5};
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // value < threshold goes left
  bool default_left = false;  // branch for missing values
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf output, already scaled by the learning rate
  double gain = 0.0;
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double output(const FeatureVector& x) const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

// Gradient tree boosting under the soft-label logistic loss
//   y ln(1 + e^-s) + (1 - y) ln(1 + e^s),
// with second-order leaf weights -G / (H + lambda). Confidence is
// logistic(base + sum of tree outputs).
class BoostedModel {
 public:
  BoostedModel() = default;
  BoostedModel(std::vector<std::string> feature_names, ScorerConfig config, double base_score);

  double margin(const FeatureVector& x) const;
  double predict(const FeatureVector& x) const;

  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::vector<RegressionTree>& mutable_trees() { return trees_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  std::uint64_t schema_hash() const { return hash_; }
  const ScorerConfig& config() const { return config_; }
  double base_score() const { return base_; }
  // Mean training loss after each round (index 0 = before any tree).
  const std::vector<double>& training_loss() const { return loss_; }
  std::vector<double>& mutable_training_loss() { return loss_; }

  nlohmann::json to_json() const;
  static BoostedModel from_json(const nlohmann::json& j);

  bool operator==(const BoostedModel&) const = default;

 private:
  void check(const FeatureVector& x) const;

  std::vector<std::string> names_;
  std::uint64_t hash_ = 0;
  ScorerConfig config_;
  double base_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> loss_;
};

std::uint64_t names_hash(std::span<const std::string> names);
double logistic(double x);
// Mean soft-label logistic loss of margins against targets.
double logistic_loss(std::span<const double> margins, std::span<const double> targets);

// Fits on the held-out set. `active` restricts which features may be split
// on (empty = all), which is how ablations drop metric groups.
BoostedModel fit_scorer(std::span<const FeatureVector> features, std::span<const double> targets,
                        const ScorerConfig& config, std::span<const std::string> feature_names,
                        std::span<const std::size_t> active = {});
BoostedModel fit_scorer(std::span<const FeatureVector> features, std::span<const double> targets,
                        const ScorerConfig& config);  // confidence_schema() names

// Mean split gain per feature divided by the largest mean gain; features
// never used get 0.
std::vector<double> feature_importance(const BoostedModel& model);

struct CrossValidation {
  ScorerConfig best;
  std::vector<ScorerConfig> configs;
  std::vector<double> scores;  // mean held-out Spearman rho per config
};

// Fold f holds the examples at positions p of a seeded permutation with
// p % folds == f.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

CrossValidation cross_validate(std::span<const FeatureVector> features,
                               std::span<const double> targets, const ScorerGrid& grid,
                               const ScorerConfig& base, int folds,
                               std::span<const std::string> feature_names,
                               std::span<const std::size_t> active = {});

void save_scorer(const BoostedModel& model, const std::filesystem::path& path);
BoostedModel load_scorer(const std::filesystem::path& path);

}  // namespace confparse

#endif  // CONFPARSE_SCORER_BOOSTING_H_
