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

#include "confparse/seq2seq/checkpoint.h"

#include <fstream>

namespace confparse {

nlohmann::json checkpoint_to_json(const Seq2SeqModel& model) {
  nlohmann::json j;
  j["format"] = "confparse-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = {{"embed_dim", model.config().embed_dim},
                 {"hidden_dim", model.config().hidden_dim},
                 {"layers", model.config().layers}};
  j["source_vocab"] = model.source_vocab().entries();
  j["target_vocab"] = model.target_vocab().entries();
  nlohmann::json params = nlohmann::json::array();
  const ParamStore& ps = model.params();
  for (std::size_t p = 0; p < ps.size(); ++p) {
    const auto id = static_cast<ParamId>(p);
    const Mat& m = ps.at(id);
    params.push_back({{"name", ps.name(id)},
                      {"rows", m.rows()},
                      {"cols", m.cols()},
                      {"data", std::vector<double>(m.flat().begin(), m.flat().end())}});
  }
  j["params"] = std::move(params);
  return j;
}

Seq2SeqModel checkpoint_from_json(const nlohmann::json& j) {
  require(j.value("format", "") == "confparse-checkpoint", "checkpoint: not a confparse checkpoint");
  const int version = j.at("version").get<int>();
  require(version == kCheckpointVersion,
          "checkpoint: unsupported version " + std::to_string(version));
  ModelConfig cfg;
  cfg.embed_dim = j.at("config").at("embed_dim").get<std::size_t>();
  cfg.hidden_dim = j.at("config").at("hidden_dim").get<std::size_t>();
  cfg.layers = j.at("config").at("layers").get<int>();
  const auto src = j.at("source_vocab").get<std::vector<std::string>>();
  const auto tgt = j.at("target_vocab").get<std::vector<std::string>>();
  ParamStore ps;
  for (const auto& p : j.at("params")) {
    Mat m(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>());
    const auto data = p.at("data").get<std::vector<double>>();
    require(data.size() == m.size(), "checkpoint: parameter size mismatch");
    std::copy(data.begin(), data.end(), m.flat().begin());
    ps.add(p.at("name").get<std::string>(), std::move(m));
  }
  return Seq2SeqModel(cfg, Vocab::from_tokens(src), Vocab::from_tokens(tgt), std::move(ps));
}

void save_checkpoint(const Seq2SeqModel& model, const std::filesystem::path& path,
                     const nlohmann::json& metadata) {
  nlohmann::json j = checkpoint_to_json(model);
  j["metadata"] = metadata;
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "checkpoint: cannot write " + path.string());
  out << j.dump() << '\n';
}

Seq2SeqModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "checkpoint: cannot read " + path.string());
  return checkpoint_from_json(nlohmann::json::parse(in));
}

}  // namespace confparse
