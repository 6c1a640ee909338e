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

#ifndef CONFPARSE_PIPELINE_CONFIG_H_
#define CONFPARSE_PIPELINE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace confparse {

// Every hyperparameter of a run. One file drives all stages.
struct RunConfig {
  std::uint64_t seed = 1;

  // corpus
  std::size_t train_size = 2000;
  std::size_t dev_size = 300;
  std::size_t test_size = 300;
  double ambiguity_rate = 0.1;
  double noise_rate = 0.05;
  double oov_rate = 0.1;

  // model
  std::size_t embed_dim = 150;
  std::size_t hidden_dim = 150;
  int layers = 1;
  int source_min_count = 4;
  int target_min_count = 4;

  // train
  int epochs = 10;
  std::size_t batch_size = 10;
  double learning_rate = 0.002;
  double rms_decay = 0.95;
  double train_dropout = 0.25;
  double clip_norm = 5.0;

  // perturb
  double perturb_dropout = 0.1;
  double noise_sigma = 0.05;
  int passes = 30;

  // decode and input-uncertainty metrics
  std::size_t beam_size = 5;
  std::size_t topk = 10;
  std::size_t entropy_samples = 30;
  bool replace_unk = true;

  // lm
  int lm_order = 3;

  // scorer
  std::vector<int> scorer_trees = {20, 50};
  std::vector<int> scorer_depths = {3, 4, 5};
  double scorer_subsample = 0.8;
  double scorer_learning_rate = 0.1;
  double scorer_lambda = 1.0;
  int cv_folds = 5;

  // eval
  std::string f1_mode = "production_set";
  int coverage_points = 20;
  int bootstrap_resamples = 1000;

  // interpret
  double proxy_sigma = 0.05;
  int proxy_passes = 30;
  std::vector<int> overlap_k = {2, 4};
  std::size_t interpret_limit = 0;  // 0 = whole test split

  bool operator==(const RunConfig&) const = default;
};

// "key = value" lines grouped under [section] headers; '#' starts a comment.
// Unknown keys, repeated keys and malformed values are errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
// Canonical text; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& c);
// Hash of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& c);
// Throws on values outside their valid ranges.
void validate(const RunConfig& c);

// Independent seed for a named stage of the run.
std::uint64_t stage_seed(const RunConfig& c, std::string_view stage);

}  // namespace confparse

#endif  // CONFPARSE_PIPELINE_CONFIG_H_
