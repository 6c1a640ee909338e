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

#ifndef CONFPARSE_PIPELINE_PIPELINE_H_
#define CONFPARSE_PIPELINE_PIPELINE_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "confparse/core/tensor.h"
#include "confparse/pipeline/config.h"

namespace confparse {

// A stage's input is absent; `prerequisite` names the command that makes it.
class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::filesystem::path& path, const std::string& prerequisite);
  const std::string& prerequisite() const { return prerequisite_; }

 private:
  std::string prerequisite_;
};

// Artifact locations inside a workspace directory.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path corpus_dir() const { return root / "corpus"; }
  std::filesystem::path checkpoint() const { return root / "model" / "checkpoint.json"; }
  std::filesystem::path features(const std::string& split) const {
    return root / "features" / (split + ".json");
  }
  std::filesystem::path predictions(const std::string& split) const {
    return root / "features" / (split + "_predictions.json");
  }
  std::filesystem::path scorer(const std::string& variant) const {
    return root / "scorer" / (variant + ".json");
  }
  std::filesystem::path cv_report() const { return root / "scorer" / "cv.json"; }
  std::filesystem::path eval_report() const { return root / "eval" / "report.json"; }
  std::filesystem::path interpret_report() const { return root / "interpret" / "reports.json"; }
  std::filesystem::path report_dir() const { return root / "report"; }
};

// Scorer variants fitted by `score`: all metrics, then one group removed.
inline constexpr const char* kScorerVariants[] = {"conf", "minus_model", "minus_data",
                                                  "minus_input"};

void cmd_generate(const RunConfig& config, const Workspace& ws);
void cmd_train(const RunConfig& config, const Workspace& ws);
// Metrics for dev and test, then scorers fitted on dev.
void cmd_score(const RunConfig& config, const Workspace& ws);
void cmd_eval(const RunConfig& config, const Workspace& ws);
void cmd_interpret(const RunConfig& config, const Workspace& ws);
void cmd_report(const RunConfig& config, const Workspace& ws);
// All of the above in order.
void cmd_run(const RunConfig& config, const Workspace& ws);

nlohmann::json read_json(const std::filesystem::path& path, const std::string& prerequisite);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace confparse

#endif  // CONFPARSE_PIPELINE_PIPELINE_H_
