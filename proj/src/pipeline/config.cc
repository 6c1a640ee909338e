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

#include "confparse/pipeline/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "confparse/core/tensor.h"

namespace confparse {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error("config: bad value for " + key + ": " + text);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // Keep a decimal point so the value reads as a real number.
  if (s.find_first_of(".e") == std::string::npos && s != "inf" && s != "nan") s += ".0";
  return s;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::vector<Field> fields(RunConfig& c) {
  std::vector<Field> f;
  auto name = [](const std::string& s, const std::string& k) { return s + "." + k; };
  auto u64 = [&](std::string s, std::string k, std::uint64_t* p) {
    f.push_back({s, k, [p] { return std::to_string(*p); },
                 [p, n = name(s, k)](const std::string& v) {
                   *p = parse_number<std::uint64_t>(v, n);
                 }});
  };
  auto size = [&](std::string s, std::string k, std::size_t* p) {
    f.push_back({s, k, [p] { return std::to_string(*p); },
                 [p, n = name(s, k)](const std::string& v) { *p = parse_number<std::size_t>(v, n); }});
  };
  auto integer = [&](std::string s, std::string k, int* p) {
    f.push_back({s, k, [p] { return std::to_string(*p); },
                 [p, n = name(s, k)](const std::string& v) { *p = parse_number<int>(v, n); }});
  };
  auto real = [&](std::string s, std::string k, double* p) {
    f.push_back({s, k, [p] { return format_double(*p); },
                 [p, n = name(s, k)](const std::string& v) { *p = parse_number<double>(v, n); }});
  };
  auto boolean = [&](std::string s, std::string k, bool* p) {
    f.push_back({s, k, [p] { return std::string(*p ? "true" : "false"); },
                 [p, n = name(s, k)](const std::string& v) {
                   if (v != "true" && v != "false") throw Error("config: " + n + " must be true or false");
                   *p = v == "true";
                 }});
  };
  auto string = [&](std::string s, std::string k, std::string* p) {
    f.push_back({s, k, [p] { return "\"" + *p + "\""; },
                 [p, n = name(s, k)](const std::string& v) {
                   if (v.size() < 2 || v.front() != '"' || v.back() != '"' ||
                       v.find('"', 1) != v.size() - 1) {
                     throw Error("config: " + n + " must be a quoted string");
                   }
                   *p = v.substr(1, v.size() - 2);
                 }});
  };
  auto ints = [&](std::string s, std::string k, std::vector<int>* p) {
    f.push_back({s, k,
                 [p] {
                   std::string out = "[";
                   for (std::size_t i = 0; i < p->size(); ++i) {
                     out += (i ? ", " : "") + std::to_string((*p)[i]);
                   }
                   return out + "]";
                 },
                 [p, n = name(s, k)](const std::string& v) {
                   if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
                     throw Error("config: " + n + " must be a list like [1, 2]");
                   }
                   p->clear();
                   std::stringstream ss(v.substr(1, v.size() - 2));
                   std::string item;
                   while (std::getline(ss, item, ',')) p->push_back(parse_number<int>(trim(item), n));
                 }});
  };

  u64("run", "seed", &c.seed);
  size("corpus", "train_size", &c.train_size);
  size("corpus", "dev_size", &c.dev_size);
  size("corpus", "test_size", &c.test_size);
  real("corpus", "ambiguity_rate", &c.ambiguity_rate);
  real("corpus", "noise_rate", &c.noise_rate);
  real("corpus", "oov_rate", &c.oov_rate);
  size("model", "embed_dim", &c.embed_dim);
  size("model", "hidden_dim", &c.hidden_dim);
  integer("model", "layers", &c.layers);
  integer("model", "source_min_count", &c.source_min_count);
  integer("model", "target_min_count", &c.target_min_count);
  integer("train", "epochs", &c.epochs);
  size("train", "batch_size", &c.batch_size);
  real("train", "learning_rate", &c.learning_rate);
  real("train", "rms_decay", &c.rms_decay);
  real("train", "dropout", &c.train_dropout);
  real("train", "clip_norm", &c.clip_norm);
  real("perturb", "dropout", &c.perturb_dropout);
  real("perturb", "noise_sigma", &c.noise_sigma);
  integer("perturb", "passes", &c.passes);
  size("decode", "beam_size", &c.beam_size);
  size("decode", "topk", &c.topk);
  size("decode", "entropy_samples", &c.entropy_samples);
  boolean("decode", "replace_unk", &c.replace_unk);
  integer("lm", "order", &c.lm_order);
  ints("scorer", "trees", &c.scorer_trees);
  ints("scorer", "depths", &c.scorer_depths);
  real("scorer", "subsample", &c.scorer_subsample);
  real("scorer", "learning_rate", &c.scorer_learning_rate);
  real("scorer", "lambda", &c.scorer_lambda);
  integer("scorer", "cv_folds", &c.cv_folds);
  string("eval", "f1_mode", &c.f1_mode);
  integer("eval", "coverage_points", &c.coverage_points);
  integer("eval", "bootstrap_resamples", &c.bootstrap_resamples);
  real("interpret", "proxy_sigma", &c.proxy_sigma);
  integer("interpret", "proxy_passes", &c.proxy_passes);
  ints("interpret", "overlap_k", &c.overlap_k);
  size("interpret", "limit", &c.interpret_limit);
  return f;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::vector<Field> table = fields(c);
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(where + "expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      if (section.empty() && key != "seed") throw Error(where + "key outside a section: " + key);
      key = (section.empty() ? "run" : section) + "." + key;
    }
    bool found = false;
    for (Field& f : table) {
      if (f.section + "." + f.key != key) continue;
      if (!seen.insert(key).second) throw Error(where + "repeated key " + key);
      try {
        f.set(value);
      } catch (const Error& e) {
        throw Error(where + e.what());
      }
      found = true;
      break;
    }
    if (!found) throw Error(where + "unknown key " + key);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "config: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& c) {
  RunConfig copy = c;
  std::string out;
  std::string section;
  for (const Field& f : fields(copy)) {
    if (f.section != section) {
      if (!out.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get() + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : format_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const RunConfig& c) {
  auto rate = [](double v, const char* what) {
    require(v >= 0.0 && v <= 1.0, std::string("config: ") + what + " must be in [0, 1]");
  };
  rate(c.ambiguity_rate, "corpus.ambiguity_rate");
  rate(c.noise_rate, "corpus.noise_rate");
  rate(c.oov_rate, "corpus.oov_rate");
  require(c.embed_dim > 0 && c.hidden_dim > 0, "config: model dimensions must be positive");
  require(c.layers >= 1, "config: model.layers must be >= 1");
  require(c.source_min_count >= 1 && c.target_min_count >= 1, "config: min counts must be >= 1");
  require(c.epochs >= 0 && c.batch_size >= 1, "config: bad training schedule");
  require(c.learning_rate > 0 && c.clip_norm > 0, "config: bad optimiser settings");
  require(c.train_dropout >= 0 && c.train_dropout < 1, "config: train.dropout must be in [0, 1)");
  require(c.perturb_dropout >= 0 && c.perturb_dropout < 1,
          "config: perturb.dropout must be in [0, 1)");
  require(c.noise_sigma >= 0 && c.proxy_sigma >= 0, "config: noise levels must be >= 0");
  require(c.passes >= 2 && c.proxy_passes >= 2, "config: need at least two perturbation passes");
  require(c.beam_size >= 1 && c.topk >= 1 && c.entropy_samples >= 1, "config: bad decode settings");
  require(c.lm_order >= 1, "config: lm.order must be >= 1");
  require(!c.scorer_trees.empty() && !c.scorer_depths.empty(), "config: empty scorer grid");
  for (int t : c.scorer_trees) require(t >= 1, "config: scorer.trees must be >= 1");
  for (int d : c.scorer_depths) require(d >= 1, "config: scorer.depths must be >= 1");
  require(c.scorer_subsample > 0 && c.scorer_subsample <= 1, "config: scorer.subsample in (0, 1]");
  require(c.cv_folds >= 2, "config: scorer.cv_folds must be >= 2");
  require(c.f1_mode == "exact" || c.f1_mode == "production_set",
          "config: eval.f1_mode must be \"exact\" or \"production_set\"");
  require(c.coverage_points >= 1 && c.bootstrap_resamples >= 1, "config: bad eval settings");
  require(!c.overlap_k.empty(), "config: interpret.overlap_k is empty");
  for (int k : c.overlap_k) require(k >= 1, "config: interpret.overlap_k entries must be >= 1");
}

std::uint64_t stage_seed(const RunConfig& c, std::string_view stage) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : stage) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix64(c.seed ^ mix64(h));
}

}  // namespace confparse
