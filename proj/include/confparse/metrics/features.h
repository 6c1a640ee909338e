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

#ifndef CONFPARSE_METRICS_FEATURES_H_
#define CONFPARSE_METRICS_FEATURES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "confparse/metrics/metrics.h"
#include "confparse/metrics/ngram_lm.h"

namespace confparse {

// Which kind of uncertainty a metric probes; used for ablations.
enum class FeatureGroup { kModel, kData, kInput };
const char* feature_group_name(FeatureGroup g);

struct FeatureSchema {
  int version = 1;
  std::vector<std::string> names;
  std::vector<FeatureGroup> groups;

  std::size_t size() const { return names.size(); }
  std::size_t index(std::string_view name) const;
  // FNV-1a over the version and the ordered names.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

// The fixed metric order shared by every report and scorer.
const FeatureSchema& confidence_schema();

struct FeatureVector {
  std::vector<double> values;
  // Set where a metric could not be computed; the value is then 0 and the
  // scorer sends the row down each split's learned default branch.
  std::vector<std::uint8_t> missing;

  double get(std::string_view name) const;
  bool operator==(const FeatureVector&) const = default;
};

struct MetricInputs {
  std::span<const std::string> source;
  const Prediction* prediction = nullptr;
  const PerturbationRun* dropout = nullptr;
  const PerturbationRun* noise_additive = nullptr;
  const PerturbationRun* noise_multiplicative = nullptr;
  const NGramLM* lm = nullptr;
  const Vocab* source_vocab = nullptr;
  std::span<const Prediction> kbest;
  std::size_t topk = 10;
  EntropyEstimate sequence_entropy;
};

FeatureVector assemble_features(const MetricInputs& in);

// One scored example in a features file.
struct FeatureRow {
  std::string id;
  FeatureVector features;
  double target = 0.0;  // F1 of the prediction
  bool operator==(const FeatureRow&) const = default;
};

nlohmann::json features_to_json(std::span<const FeatureRow> rows);
// Rejects files written with a different schema.
std::vector<FeatureRow> features_from_json(const nlohmann::json& j);

}  // namespace confparse

#endif  // CONFPARSE_METRICS_FEATURES_H_
