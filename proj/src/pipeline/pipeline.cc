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

#include "confparse/pipeline/pipeline.h"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include "confparse/corpus/corpus.h"
#include "confparse/eval/eval.h"
#include "confparse/interpret/interpret.h"
#include "confparse/metrics/features.h"
#include "confparse/metrics/metrics.h"
#include "confparse/metrics/ngram_lm.h"
#include "confparse/perturb/perturb.h"
#include "confparse/scorer/boosting.h"
#include "confparse/seq2seq/checkpoint.h"
#include "confparse/seq2seq/decode.h"
#include "confparse/seq2seq/train.h"

namespace confparse {

MissingArtifact::MissingArtifact(const std::filesystem::path& path, const std::string& prerequisite)
    : Error("missing " + path.string() + "; run `confparse " + prerequisite + "` first"),
      prerequisite_(prerequisite) {}

nlohmann::json read_json(const std::filesystem::path& path, const std::string& prerequisite) {
  if (!std::filesystem::exists(path)) throw MissingArtifact(path, prerequisite);
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << j.dump(1) << '\n';
  require(static_cast<bool>(out), "write failed for " + path.string());
}

namespace {

void log(const std::string& stage, const std::string& msg) {
  std::clog << "[" << stage << "] " << msg << std::endl;
}

std::string format_double(double v, int precision = 4) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << std::fixed << v;
  return ss.str();
}

CorpusSplit require_corpus(const Workspace& ws) {
  if (!std::filesystem::exists(ws.corpus_dir() / "manifest.json")) {
    throw MissingArtifact(ws.corpus_dir() / "manifest.json", "generate");
  }
  return load_corpus(ws.corpus_dir());
}

Seq2SeqModel require_model(const Workspace& ws) {
  if (!std::filesystem::exists(ws.checkpoint())) throw MissingArtifact(ws.checkpoint(), "train");
  return load_checkpoint(ws.checkpoint());
}

F1Mode f1_mode(const RunConfig& c) {
  return c.f1_mode == "exact" ? F1Mode::kExact : F1Mode::kProductionSet;
}

// Runs fn(i) for i in [0, n) in parallel and rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  std::exception_ptr error;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(confparse_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

struct ScoredExample {
  FeatureRow row;
  nlohmann::json record;
};

ScoredExample score_example(const RunConfig& c, const Seq2SeqModel& model, const NGramLM& lm,
                            const Example& ex, const std::string& id, const RngStream& rng) {
  const std::vector<TokenId> src = model.source_vocab().encode(ex.source);
  const std::vector<Prediction> beam = beam_search(model, src, c.beam_size);
  const Prediction& pred = beam.front();
  const std::vector<Prediction> kbest =
      c.topk == c.beam_size ? beam : beam_search(model, src, c.topk);
  const std::span<const TokenId> tgt = pred.tokens;

  const PerturbationRun dropout = perturbed_passes(
      model, src, tgt, dropout_config(c.perturb_dropout, c.passes, rng.fork(0).next_u64()));
  const PerturbationRun add = perturbed_passes(
      model, src, tgt,
      gaussian_config(c.noise_sigma, NoiseMode::kAdditive, c.passes, rng.fork(1).next_u64()));
  const PerturbationRun mul = perturbed_passes(
      model, src, tgt,
      gaussian_config(c.noise_sigma, NoiseMode::kMultiplicative, c.passes, rng.fork(2).next_u64()));
  RngStream sampler = rng.fork(3);
  const EntropyEstimate entropy = decoding_entropy(model, src, c.entropy_samples, sampler);

  MetricInputs in;
  in.source = ex.source;
  in.prediction = &pred;
  in.dropout = &dropout;
  in.noise_additive = &add;
  in.noise_multiplicative = &mul;
  in.lm = &lm;
  in.source_vocab = &model.source_vocab();
  in.kbest = kbest;
  in.topk = c.topk;
  in.sequence_entropy = entropy;

  const Tokens output = output_tokens(pred, model.target_vocab(), ex.source, c.replace_unk);
  const F1Result score = f1(output, ex.target, f1_mode(c));

  ScoredExample out;
  out.row.id = id;
  out.row.features = assemble_features(in);
  out.row.target = score.value;
  out.record = {{"id", id},
                {"source", ex.source},
                {"gold", ex.target},
                {"prediction", output},
                {"prediction_ids", pred.tokens},
                {"terminated", pred.terminated},
                {"f1", score.value},
                {"f1_fallback", score.fell_back},
                {"token_uncertainty", token_uncertainty(dropout).per_token}};
  return out;
}

std::vector<std::size_t> active_features(const std::string& variant) {
  const FeatureSchema& schema = confidence_schema();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const FeatureGroup g = schema.groups[i];
    if (variant == "minus_model" && g == FeatureGroup::kModel) continue;
    if (variant == "minus_data" && g == FeatureGroup::kData) continue;
    if (variant == "minus_input" && g == FeatureGroup::kInput) continue;
    out.push_back(i);
  }
  return out;
}

struct FeatureFile {
  std::vector<FeatureRow> rows;
  std::vector<FeatureVector> x;
  std::vector<double> y;
};

FeatureFile load_features(const Workspace& ws, const std::string& split) {
  FeatureFile f;
  f.rows = features_from_json(read_json(ws.features(split), "score").at("features"));
  for (const FeatureRow& r : f.rows) {
    f.x.push_back(r.features);
    f.y.push_back(r.target);
  }
  return f;
}

nlohmann::json rho_json(const Correlation& c) {
  return {{"rho", c.rho}, {"defined", c.defined}};
}

}  // namespace

void cmd_generate(const RunConfig& c, const Workspace& ws) {
  validate(c);
  GrammarSpec g = default_grammar();
  g.ambiguity_rate = c.ambiguity_rate;
  g.noise_rate = c.noise_rate;
  g.oov_rate = c.oov_rate;
  g.seed = stage_seed(c, "corpus");
  CorpusSplit corpus = generate_corpus(g, {c.train_size, c.dev_size, c.test_size});
  corpus.manifest["config_hash"] = config_hash(c);
  save_corpus(corpus, ws.corpus_dir());
  log("generate", std::to_string(corpus.train.size()) + "/" + std::to_string(corpus.dev.size()) +
                      "/" + std::to_string(corpus.test.size()) + " examples in " +
                      ws.corpus_dir().string());
}

void cmd_train(const RunConfig& c, const Workspace& ws) {
  validate(c);
  const CorpusSplit corpus = require_corpus(ws);
  const std::vector<Example> train_set = examples_of(corpus.train);
  const std::vector<Example> dev_set = examples_of(corpus.dev);
  std::vector<Tokens> sources, targets;
  for (const Example& e : train_set) {
    sources.push_back(e.source);
    targets.push_back(e.target);
  }
  Seq2SeqModel model({c.embed_dim, c.hidden_dim, c.layers},
                     Vocab::build(sources, c.source_min_count),
                     Vocab::build(targets, c.target_min_count), stage_seed(c, "init"));
  TrainConfig tc;
  tc.epochs = c.epochs;
  tc.batch_size = c.batch_size;
  tc.learning_rate = c.learning_rate;
  tc.rms_decay = c.rms_decay;
  tc.dropout = c.train_dropout;
  tc.clip_norm = c.clip_norm;
  tc.seed = stage_seed(c, "train");
  const TrainResult result = train(model, train_set, dev_set, tc, [](int epoch, double tr, double dv) {
    log("train", "epoch " + std::to_string(epoch + 1) + " train " + format_double(tr) + " dev " +
                     format_double(dv));
  });
  std::filesystem::create_directories(ws.checkpoint().parent_path());
  save_checkpoint(model, ws.checkpoint(),
                  {{"config_hash", config_hash(c)},
                   {"train_loss", result.train_loss},
                   {"dev_loss", result.dev_loss},
                   {"best_epoch", result.best_epoch}});
  log("train", "saved " + ws.checkpoint().string());
}

void cmd_score(const RunConfig& c, const Workspace& ws) {
  validate(c);
  const CorpusSplit corpus = require_corpus(ws);
  const Seq2SeqModel model = require_model(ws);
  std::vector<Tokens> sources;
  for (const CorpusExample& e : corpus.train) sources.push_back(e.example.source);
  const NGramLM lm = NGramLM::fit(sources, c.lm_order);
  const RngStream root(stage_seed(c, "score"));
  const std::string hash = config_hash(c);

  const std::pair<std::string, const std::vector<CorpusExample>*> splits[] = {
      {"dev", &corpus.dev}, {"test", &corpus.test}};
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& [name, examples] = splits[s];
    std::vector<ScoredExample> scored(examples->size());
    const RngStream split_rng = root.fork(s);
    parallel_for(examples->size(), [&](std::size_t i) {
      scored[i] = score_example(c, model, lm, (*examples)[i].example,
                                name + "-" + std::to_string(i), split_rng.fork(i));
    });
    std::vector<FeatureRow> rows;
    nlohmann::json records = nlohmann::json::array();
    double mean_f1 = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      rows.push_back(scored[i].row);
      nlohmann::json r = std::move(scored[i].record);
      r["ambiguous"] = (*examples)[i].ambiguous;
      r["noisy"] = (*examples)[i].noisy;
      r["oov"] = (*examples)[i].oov;
      records.push_back(std::move(r));
      mean_f1 += scored[i].row.target;
    }
    mean_f1 /= static_cast<double>(std::max<std::size_t>(1, scored.size()));
    write_json(ws.features(name), {{"config_hash", hash}, {"features", features_to_json(rows)}});
    write_json(ws.predictions(name), {{"config_hash", hash}, {"examples", std::move(records)}});
    log("score", name + ": " + std::to_string(rows.size()) + " examples, mean F1 " +
                     format_double(mean_f1));
  }

  // Confidence scorers are fitted on the held-out dev split.
  const FeatureFile dev = load_features(ws, "dev");
  const FeatureSchema& schema = confidence_schema();
  ScorerGrid grid{c.scorer_trees, c.scorer_depths};
  ScorerConfig base;
  base.subsample = c.scorer_subsample;
  base.learning_rate = c.scorer_learning_rate;
  base.lambda = c.scorer_lambda;
  base.seed = stage_seed(c, "scorer");
  nlohmann::json cv_json;
  for (const char* variant : kScorerVariants) {
    const std::vector<std::size_t> active = active_features(variant);
    const CrossValidation cv =
        cross_validate(dev.x, dev.y, grid, base, c.cv_folds, schema.names, active);
    const BoostedModel m = fit_scorer(dev.x, dev.y, cv.best, schema.names, active);
    nlohmann::json j = m.to_json();
    j["config_hash"] = hash;
    j["variant"] = variant;
    write_json(ws.scorer(variant), j);
    nlohmann::json grid_json = nlohmann::json::array();
    for (std::size_t i = 0; i < cv.configs.size(); ++i) {
      grid_json.push_back({{"n_trees", cv.configs[i].n_trees},
                           {"max_depth", cv.configs[i].max_depth},
                           {"cv_spearman", cv.scores[i]}});
    }
    cv_json[variant] = {{"grid", grid_json},
                        {"best", {{"n_trees", cv.best.n_trees}, {"max_depth", cv.best.max_depth}}}};
    log("score", std::string(variant) + ": trees " + std::to_string(cv.best.n_trees) + " depth " +
                     std::to_string(cv.best.max_depth));
  }
  write_json(ws.cv_report(), {{"config_hash", hash}, {"variants", cv_json}});
}

void cmd_eval(const RunConfig& c, const Workspace& ws) {
  validate(c);
  const FeatureFile test = load_features(ws, "test");
  const FeatureSchema& schema = confidence_schema();
  const std::string hash = config_hash(c);

  nlohmann::json methods;
  std::vector<std::vector<double>> confidence;
  for (const char* variant : kScorerVariants) {
    const BoostedModel m = BoostedModel::from_json(read_json(ws.scorer(variant), "score"));
    std::vector<double> s;
    for (const FeatureVector& x : test.x) s.push_back(m.predict(x));
    methods[variant] = {{"spearman", rho_json(spearman(s, test.y))}, {"scores", s}};
    confidence.push_back(std::move(s));
  }
  std::vector<double> posterior;
  const std::size_t lp = schema.index("log_posterior");
  for (const FeatureVector& x : test.x) posterior.push_back(x.values[lp]);
  methods["posterior"] = {{"spearman", rho_json(spearman(posterior, test.y))},
                          {"scores", posterior}};

  const std::uint64_t boot_seed = stage_seed(c, "bootstrap");
  nlohmann::json boot;
  auto add_boot = [&](const std::string& name, const std::vector<double>& other) {
    const BootstrapResult b =
        bootstrap_rho_difference(confidence[0], other, test.y, c.bootstrap_resamples, boot_seed);
    boot[name] = {{"delta", b.delta}, {"p_value", b.p_value}, {"resamples", b.resamples}};
  };
  add_boot("conf_vs_posterior", posterior);
  for (std::size_t v = 1; v < std::size(kScorerVariants); ++v) {
    add_boot(std::string("conf_vs_") + kScorerVariants[v], confidence[v]);
  }

  std::vector<std::string> names = {"f1"};
  std::vector<std::vector<double>> columns = {test.y};
  for (std::size_t f = 0; f < schema.size(); ++f) {
    names.push_back(schema.names[f]);
    std::vector<double> col;
    for (const FeatureVector& x : test.x) col.push_back(x.values[f]);
    columns.push_back(std::move(col));
  }
  const CorrelationMatrix corr = correlation_matrix(names, columns);

  nlohmann::json coverage;
  const std::pair<const char*, const std::vector<double>*> curves[] = {
      {"conf", &confidence[0]}, {"posterior", &posterior}};
  for (const auto& [name, scores] : curves) {
    const std::vector<CoveragePoint> raw = coverage_curve(*scores, test.y, c.coverage_points);
    coverage[name] = {{"raw", coverage_to_json(raw)},
                      {"isotonic", coverage_to_json(isotonic_smooth(raw))}};
  }

  const BoostedModel conf = BoostedModel::from_json(read_json(ws.scorer("conf"), "score"));
  const std::vector<double> importance = feature_importance(conf);
  nlohmann::json imp = nlohmann::json::array();
  for (std::size_t f = 0; f < schema.size(); ++f) {
    imp.push_back({{"feature", schema.names[f]},
                   {"group", feature_group_name(schema.groups[f])},
                   {"importance", importance[f]}});
  }

  double mean_f1 = 0.0;
  for (double y : test.y) mean_f1 += y;
  mean_f1 /= static_cast<double>(std::max<std::size_t>(1, test.y.size()));
  write_json(ws.eval_report(), {{"format", "confparse-eval"},
                                {"config_hash", hash},
                                {"split", "test"},
                                {"examples", test.y.size()},
                                {"mean_f1", mean_f1},
                                {"f1", test.y},
                                {"methods", methods},
                                {"bootstrap", boot},
                                {"correlation", correlation_to_json(corr)},
                                {"coverage", coverage},
                                {"importance", imp}});
  log("eval", "spearman conf " + format_double(methods["conf"]["spearman"]["rho"].get<double>()) +
                  " posterior " +
                  format_double(methods["posterior"]["spearman"]["rho"].get<double>()) +
                  " (p = " + format_double(boot["conf_vs_posterior"]["p_value"].get<double>()) +
                  ")");
}

void cmd_interpret(const RunConfig& c, const Workspace& ws) {
  validate(c);
  const Seq2SeqModel model = require_model(ws);
  const nlohmann::json preds = read_json(ws.predictions("test"), "score");
  const auto& examples = preds.at("examples");
  std::size_t n = examples.size();
  if (c.interpret_limit > 0) n = std::min(n, c.interpret_limit);
  const RngStream root(stage_seed(c, "interpret"));

  std::vector<nlohmann::json> out(n);
  parallel_for(n, [&](std::size_t i) {
    const nlohmann::json& e = examples[i];
    const Tokens source = e.at("source").get<Tokens>();
    const std::vector<TokenId> src = model.source_vocab().encode(source);
    const std::vector<TokenId> tgt = e.at("prediction_ids").get<std::vector<TokenId>>();
    const std::vector<double> u = e.at("token_uncertainty").get<std::vector<double>>();

    UncertaintyReport backprop = interpret_backprop(model, src, tgt, u);
    const Prediction forced = score_target(model, src, tgt);
    UncertaintyReport attention = attention_interpretation(forced.attention, u);
    backprop.tokens = source;
    attention.tokens = source;
    const std::vector<double> gold =
        proxy_gold(model, src, tgt, c.proxy_sigma, c.proxy_passes, root.fork(i).next_u64());
    nlohmann::json overlap;
    for (int k : c.overlap_k) {
      const std::string key = std::to_string(k);
      const Overlap ob = overlap_at_k(backprop.scores, gold, static_cast<std::size_t>(k));
      const Overlap oa = overlap_at_k(attention.scores, gold, static_cast<std::size_t>(k));
      overlap["backprop"][key] = ob.value;
      overlap["attention"][key] = oa.value;
      overlap["clamped"][key] = ob.clamped;
    }
    out[i] = {{"id", e.at("id")},
              {"backprop", report_to_json(backprop)},
              {"attention", report_to_json(attention)},
              {"proxy_gold", gold},
              {"overlap", overlap}};
  });

  nlohmann::json summary;
  for (const char* method : {"backprop", "attention"}) {
    for (int k : c.overlap_k) {
      const std::string key = std::to_string(k);
      double total = 0.0;
      for (const nlohmann::json& r : out) total += r["overlap"][method][key].get<double>();
      summary[method][key] = n ? total / static_cast<double>(n) : 0.0;
    }
  }
  write_json(ws.interpret_report(), {{"format", "confparse-interpret"},
                                     {"config_hash", config_hash(c)},
                                     {"examples", out},
                                     {"mean_overlap", summary}});
  std::string msg = std::to_string(n) + " examples;";
  for (int k : c.overlap_k) {
    const std::string key = std::to_string(k);
    msg += " overlap@" + key + " backprop " + format_double(summary["backprop"][key].get<double>()) +
           " attention " + format_double(summary["attention"][key].get<double>()) + ";";
  }
  log("interpret", msg);
}

void cmd_report(const RunConfig& c, const Workspace& ws) {
  validate(c);
  const nlohmann::json report = read_json(ws.eval_report(), "eval");
  std::filesystem::create_directories(ws.report_dir());
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream out(ws.report_dir() / file, std::ios::binary);
    require(static_cast<bool>(out), "cannot write " + (ws.report_dir() / file).string());
    out << text;
  };
  auto num = [](const nlohmann::json& v) { return v.is_null() ? std::string("") : v.dump(); };

  // Rows run from full coverage to the highest threshold.
  std::string cov = "method,threshold,coverage,f1,f1_isotonic\n";
  for (const char* method : {"conf", "posterior"}) {
    const std::vector<CoveragePoint> raw = coverage_from_json(report["coverage"][method]["raw"]);
    const std::vector<CoveragePoint> iso =
        coverage_from_json(report["coverage"][method]["isotonic"]);
    for (std::size_t i = raw.size(); i-- > 0;) {
      cov += std::string(method) + "," +
             (std::isfinite(raw[i].threshold) ? nlohmann::json(raw[i].threshold).dump()
                                               : std::string("-inf")) +
             "," + nlohmann::json(raw[i].coverage).dump() + "," + nlohmann::json(raw[i].f1).dump() +
             "," + nlohmann::json(iso[i].f1).dump() + "\n";
    }
  }
  write("coverage.csv", cov);

  const auto& corr = report["correlation"];
  std::string cm = "metric";
  for (const auto& name : corr["names"]) cm += "," + name.get<std::string>();
  cm += "\n";
  for (std::size_t i = 0; i < corr["names"].size(); ++i) {
    cm += corr["names"][i].get<std::string>();
    for (const auto& v : corr["rho"][i]) cm += "," + num(v);
    cm += "\n";
  }
  write("correlation.csv", cm);

  std::string imp = "feature,group,importance\n";
  for (const auto& row : report["importance"]) {
    imp += row["feature"].get<std::string>() + "," + row["group"].get<std::string>() + "," +
           row["importance"].dump() + "\n";
  }
  write("importance.csv", imp);

  std::string rho = "method,spearman\n";
  for (const char* method : {"conf", "minus_model", "minus_data", "minus_input", "posterior"}) {
    rho += std::string(method) + "," + num(report["methods"][method]["spearman"]["rho"]) + "\n";
  }
  write("spearman.csv", rho);

  if (std::filesystem::exists(ws.interpret_report())) {
    const nlohmann::json interp = read_json(ws.interpret_report(), "interpret");
    std::string ov = "method,k,overlap\n";
    for (const char* method : {"backprop", "attention"}) {
      for (const auto& [k, v] : interp["mean_overlap"][method].items()) {
        ov += std::string(method) + "," + k + "," + v.dump() + "\n";
      }
    }
    write("overlap.csv", ov);
  }
  log("report", "wrote CSV files to " + ws.report_dir().string());
}

void cmd_run(const RunConfig& c, const Workspace& ws) {
  cmd_generate(c, ws);
  cmd_train(c, ws);
  cmd_score(c, ws);
  cmd_eval(c, ws);
  cmd_interpret(c, ws);
  cmd_report(c, ws);
}

}  // namespace confparse
