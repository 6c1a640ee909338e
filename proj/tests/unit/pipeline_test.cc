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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "confparse/eval/eval.h"
#include "confparse/pipeline/config.h"
#include "confparse/pipeline/pipeline.h"
#include "confparse/scorer/boosting.h"
#include "tiny_config.h"

namespace confparse {
namespace {

TEST(Config, DefaultsMatchTheMethodSettings) {
  const RunConfig c;
  EXPECT_EQ(c.perturb_dropout, 0.1);
  EXPECT_EQ(c.passes, 30);
  EXPECT_EQ(c.noise_sigma, 0.05);
  EXPECT_EQ(c.topk, 10u);
  EXPECT_EQ(c.beam_size, 5u);
  EXPECT_EQ(c.scorer_trees, (std::vector<int>{20, 50}));
  EXPECT_EQ(c.scorer_depths, (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(c.train_dropout, 0.25);
  EXPECT_EQ(c.embed_dim, 150u);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, FormatParseRoundTrip) {
  const RunConfig c = testing::tiny_config();
  EXPECT_EQ(c.train_size, 300u);
  EXPECT_EQ(c.scorer_depths, (std::vector<int>{2, 3}));
  EXPECT_EQ(parse_config(format_config(c)), c);
  EXPECT_EQ(parse_config(format_config(RunConfig{})), RunConfig{});
  EXPECT_EQ(config_hash(parse_config(format_config(c))), config_hash(c));
  EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
}

TEST(Config, RejectsUnknownRepeatedAndMalformed) {
  EXPECT_THROW(parse_config("[train]\nepochz = 3\n"), Error);
  EXPECT_THROW(parse_config("[train]\nepochs = 3\nepochs = 4\n"), Error);
  EXPECT_THROW(parse_config("[train]\nepochs = three\n"), Error);
  EXPECT_THROW(parse_config("[decode]\nreplace_unk = yes\n"), Error);
  EXPECT_THROW(parse_config("[train\nepochs = 3\n"), Error);
  EXPECT_THROW(parse_config("epochs = 3\n"), Error);
  EXPECT_THROW(parse_config("[scorer]\ntrees = 20, 50\n"), Error);
  EXPECT_THROW(parse_config("[nonsense]\nx = 1\n"), Error);
}

TEST(Config, CommentsAndDottedKeys) {
  const RunConfig c = parse_config("# top\n[train]\nepochs = 7  # inline\n[run]\ndecode.beam_size = 3\n");
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.beam_size, 3u);
}

TEST(Config, ValidationCatchesBadValues) {
  RunConfig c;
  c.passes = 1;
  EXPECT_THROW(validate(c), Error);
  c = RunConfig{};
  c.f1_mode = "fuzzy";
  EXPECT_THROW(validate(c), Error);
  c = RunConfig{};
  c.perturb_dropout = 1.0;
  EXPECT_THROW(validate(c), Error);
}

TEST(Config, StageSeedsDifferByStageAndRunSeed) {
  RunConfig a, b;
  b.seed = 2;
  EXPECT_NE(stage_seed(a, "corpus"), stage_seed(a, "train"));
  EXPECT_NE(stage_seed(a, "corpus"), stage_seed(b, "corpus"));
  EXPECT_EQ(stage_seed(a, "corpus"), stage_seed(RunConfig{}, "corpus"));
}

TEST(Pipeline, EvalWithoutScorerNamesTheScoreCommand) {
  const Workspace ws{std::filesystem::temp_directory_path() / "confparse_missing_ws"};
  std::filesystem::remove_all(ws.root);
  try {
    cmd_train(testing::tiny_config(), ws);
    FAIL() << "expected MissingArtifact";
  } catch (const MissingArtifact& e) {
    EXPECT_EQ(e.prerequisite(), "generate");
  }

  const RunConfig c = testing::tiny_config();
  cmd_generate(c, ws);
  cmd_train(c, ws);
  cmd_score(c, ws);
  std::filesystem::remove(ws.scorer("conf"));
  try {
    cmd_eval(c, ws);
    FAIL() << "expected MissingArtifact";
  } catch (const MissingArtifact& e) {
    EXPECT_EQ(e.prerequisite(), "score");
    EXPECT_NE(std::string(e.what()).find("confparse score"), std::string::npos);
  }
  std::filesystem::remove_all(ws.root);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(Pipeline, ReportCsvsMirrorTheEvalReport) {
  const Workspace ws{std::filesystem::temp_directory_path() / "confparse_report_ws"};
  std::filesystem::remove_all(ws.root);
  const RunConfig c = testing::tiny_config();
  cmd_run(c, ws);
  const nlohmann::json report = read_json(ws.eval_report(), "eval");
  const std::string hash = config_hash(c);
  for (const auto& e : std::filesystem::recursive_directory_iterator(ws.root)) {
    if (e.path().extension() != ".json") continue;
    const nlohmann::json j = read_json(e.path(), "run");
    const bool direct = j.contains("config_hash") && j["config_hash"] == hash;
    const bool nested = j.contains("metadata") && j["metadata"].value("config_hash", "") == hash;
    EXPECT_TRUE(direct || nested) << e.path();
  }

  const auto cov = read_csv(ws.report_dir() / "coverage.csv");
  ASSERT_GE(cov.size(), 2u);
  EXPECT_EQ(cov[0], (std::vector<std::string>{"method", "threshold", "coverage", "f1", "f1_isotonic"}));
  EXPECT_EQ(cov[1][0], "conf");
  EXPECT_EQ(cov[1][1], "-inf");
  EXPECT_EQ(std::stod(cov[1][2]), 1.0);
  const auto raw = coverage_from_json(report["coverage"]["conf"]["raw"]);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& row = cov[1 + i];
    const CoveragePoint& pt = raw[raw.size() - 1 - i];
    EXPECT_EQ(std::stod(row[2]), pt.coverage);
    EXPECT_EQ(std::stod(row[3]), pt.f1);
  }

  const auto imp = read_csv(ws.report_dir() / "importance.csv");
  double mx = 0.0;
  for (std::size_t i = 1; i < imp.size(); ++i) mx = std::max(mx, std::stod(imp[i][2]));
  const BoostedModel conf = load_scorer(ws.scorer("conf"));
  EXPECT_EQ(mx, conf.trees().empty() ? 0.0 : 1.0);

  const auto rho = read_csv(ws.report_dir() / "spearman.csv");
  ASSERT_EQ(rho.size(), 6u);
  for (std::size_t i = 1; i < rho.size(); ++i) {
    const auto& sp = report["methods"][rho[i][0]]["spearman"]["rho"];
    if (sp.is_null()) {
      EXPECT_EQ(rho[i].size(), 1u);
    } else {
      EXPECT_EQ(std::stod(rho[i][1]), sp.get<double>()) << rho[i][0];
    }
  }
  EXPECT_TRUE(std::filesystem::exists(ws.report_dir() / "overlap.csv"));
  std::filesystem::remove_all(ws.root);
}

}  // namespace
}  // namespace confparse
