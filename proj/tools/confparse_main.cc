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

// Command-line driver for the confidence pipeline.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "confparse/pipeline/config.h"
#include "confparse/pipeline/pipeline.h"

namespace {

constexpr const char* kReportHelp = R"(Writes CSV files into <workspace>/report:
  coverage.csv     method,threshold,coverage,f1,f1_isotonic
                   one row per threshold, starting at full coverage
                   (threshold -inf); f1 is the mean F1 of the covered
                   examples, f1_isotonic its monotone fit
  correlation.csv  metric,<names...>: Spearman rho between F1 and every
                   metric on the test split; empty cells are undefined
  importance.csv   feature,group,importance: mean split gain of the full
                   scorer, divided by the largest value
  spearman.csv     method,spearman: rho between confidence and F1
  overlap.csv      method,k,overlap: mean overlap@k against the proxy
                   gold (only when interpret has run))";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confparse: confidence estimation and uncertainty interpretation for a neural "
               "semantic parser"};
  app.require_subcommand(1);
  std::string workspace = "workspace";
  std::string config_path;
  app.add_option("-w,--workspace", workspace, "Directory holding all artifacts")
      ->capture_default_str();
  app.add_option("-c,--config", config_path, "Run configuration file (defaults if omitted)");

  auto* generate = app.add_subcommand("generate", "Generate the synthetic corpus");
  auto* train = app.add_subcommand("train", "Train the encoder-decoder parser");
  auto* score = app.add_subcommand("score", "Extract confidence metrics and fit scorers on dev");
  auto* eval = app.add_subcommand("eval", "Evaluate confidence scores on test");
  auto* interpret = app.add_subcommand("interpret", "Attribute uncertainty to input tokens");
  auto* report = app.add_subcommand("report", "Write plot-ready CSV files");
  report->footer(kReportHelp);
  auto* run = app.add_subcommand("run", "Run every stage in order");
  auto* show = app.add_subcommand("config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    const confparse::RunConfig config =
        config_path.empty() ? confparse::RunConfig{} : confparse::load_config(config_path);
    confparse::validate(config);
    const confparse::Workspace ws{workspace};
    if (*show) {
      std::cout << confparse::format_config(config);
    } else if (*generate) {
      confparse::cmd_generate(config, ws);
    } else if (*train) {
      confparse::cmd_train(config, ws);
    } else if (*score) {
      confparse::cmd_score(config, ws);
    } else if (*eval) {
      confparse::cmd_eval(config, ws);
    } else if (*interpret) {
      confparse::cmd_interpret(config, ws);
    } else if (*report) {
      confparse::cmd_report(config, ws);
    } else if (*run) {
      confparse::cmd_run(config, ws);
    }
  } catch (const confparse::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
