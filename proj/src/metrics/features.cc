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

#include "confparse/metrics/features.h"

#include <cmath>
#include <cstdio>

namespace confparse {

const char* feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::kModel: return "model";
    case FeatureGroup::kData: return "data";
    case FeatureGroup::kInput: return "input";
  }
  return "?";
}

std::size_t FeatureSchema::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error("FeatureSchema: unknown feature " + std::string(name));
}

std::uint64_t FeatureSchema::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  feed(std::to_string(version));
  for (const std::string& n : names) feed(n);
  return h;
}

std::string FeatureSchema::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

const FeatureSchema& confidence_schema() {
  static const FeatureSchema schema = [] {
    using G = FeatureGroup;
    FeatureSchema s;
    const std::pair<const char*, G> entries[] = {
        {"dropout_seq_var", G::kModel},   {"dropout_tok_avg", G::kModel},
        {"dropout_tok_max", G::kModel},   {"noise_add_seq_var", G::kModel},
        {"noise_add_tok_avg", G::kModel}, {"noise_add_tok_max", G::kModel},
        {"noise_mul_seq_var", G::kModel}, {"noise_mul_tok_avg", G::kModel},
        {"noise_mul_tok_max", G::kModel}, {"log_posterior", G::kModel},
        {"min_token_prob", G::kModel},    {"avg_neg_logprob", G::kModel},
        {"lm_logprob", G::kData},         {"unk_count", G::kData},
        {"topk_var", G::kInput},          {"seq_entropy_mc", G::kInput},
        {"tok_entropy_avg", G::kInput},   {"tok_entropy_max", G::kInput},
    };
    for (const auto& [name, group] : entries) {
      s.names.emplace_back(name);
      s.groups.push_back(group);
    }
    return s;
  }();
  return schema;
}

double FeatureVector::get(std::string_view name) const {
  return values.at(confidence_schema().index(name));
}

FeatureVector assemble_features(const MetricInputs& in) {
  require(in.prediction && in.dropout && in.noise_additive && in.noise_multiplicative && in.lm &&
              in.source_vocab,
          "assemble_features: missing metric input");
  const FeatureSchema& schema = confidence_schema();
  FeatureVector f;
  f.values.assign(schema.size(), 0.0);
  f.missing.assign(schema.size(), 0);
  auto set = [&](std::string_view name, double v) { f.values[schema.index(name)] = v; };

  const PerturbationRun* runs[] = {in.dropout, in.noise_additive, in.noise_multiplicative};
  const char* prefix[] = {"dropout", "noise_add", "noise_mul"};
  for (int r = 0; r < 3; ++r) {
    const TokenUncertainty tu = token_uncertainty(*runs[r]);
    const std::string p = prefix[r];
    set(p + "_seq_var", seq_variance(*runs[r]));
    set(p + "_tok_avg", tu.avg);
    set(p + "_tok_max", tu.max);
  }
  const PosteriorMetrics pm = posterior_metrics(*in.prediction);
  set("log_posterior", pm.log_posterior);
  set("min_token_prob", pm.min_token_prob);
  set("avg_neg_logprob", pm.avg_neg_logprob);
  set("lm_logprob", in.lm->normalized_logprob(in.source));
  set("unk_count", static_cast<double>(count_unk(in.source, *in.source_vocab)));
  const TopKVariance tk = topk_variance(in.kbest, in.topk);
  set("topk_var", tk.value);
  if (tk.missing) f.missing[schema.index("topk_var")] = 1;
  set("seq_entropy_mc", in.sequence_entropy.value);
  const TokenEntropies te = token_entropies(*in.prediction);
  set("tok_entropy_avg", te.avg);
  set("tok_entropy_max", te.max);
  for (double v : f.values) require(std::isfinite(v), "assemble_features: non-finite metric");
  return f;
}

nlohmann::json features_to_json(std::span<const FeatureRow> rows) {
  const FeatureSchema& schema = confidence_schema();
  nlohmann::json j;
  j["schema"] = {{"version", schema.version}, {"hash", schema.hash_hex()}, {"names", schema.names}};
  nlohmann::json arr = nlohmann::json::array();
  for (const FeatureRow& r : rows) {
    require(r.features.values.size() == schema.size(), "features_to_json: wrong feature count");
    for (double v : r.features.values) require(std::isfinite(v), "features_to_json: non-finite value");
    arr.push_back({{"id", r.id},
                   {"values", r.features.values},
                   {"missing", r.features.missing},
                   {"target", r.target}});
  }
  j["rows"] = std::move(arr);
  return j;
}

std::vector<FeatureRow> features_from_json(const nlohmann::json& j) {
  const FeatureSchema& schema = confidence_schema();
  require(j.at("schema").at("hash").get<std::string>() == schema.hash_hex(),
          "features file: schema mismatch");
  std::vector<FeatureRow> rows;
  for (const auto& r : j.at("rows")) {
    FeatureRow row;
    row.id = r.at("id").get<std::string>();
    row.features.values = r.at("values").get<std::vector<double>>();
    row.features.missing = r.at("missing").get<std::vector<std::uint8_t>>();
    row.target = r.at("target").get<double>();
    require(row.features.values.size() == schema.size() &&
                row.features.missing.size() == schema.size(),
            "features file: wrong feature count in row " + row.id);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace confparse
