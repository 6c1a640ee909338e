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

#include "confparse/corpus/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "confparse/core/tensor.h"

namespace confparse {
namespace {

constexpr const char* kPersonSlot = "person";

// Slot names referenced by a pattern, in order of appearance.
std::vector<std::string> placeholders(const std::string& pattern) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string::npos) {
    const std::size_t end = pattern.find('}', pos);
    require(end != std::string::npos, "grammar: unclosed placeholder in \"" + pattern + "\"");
    out.push_back(pattern.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

std::string substitute(std::string text, const std::string& slot, const std::string& with) {
  const std::string key = "{" + slot + "}";
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), with);
    pos += with.size();
  }
  return text;
}

std::vector<std::string> syllable_names() {
  const std::string consonants = "bdfgklmnprstvz";
  const std::string vowels = "aeiou";
  std::vector<std::string> names;
  for (char c1 : consonants)
    for (char v1 : vowels)
      for (char c2 : consonants)
        for (char v2 : vowels) names.push_back(std::string{c1, v1, c2, v2});
  RngStream rng(0x6e616d6573ULL);
  for (std::size_t i = names.size(); i > 1; --i) std::swap(names[i - 1], names[rng.below(i)]);
  return names;
}

bool ambiguous_slot(const GrammarSpec& spec, const std::string& slot) {
  if (slot == kPersonSlot) return false;
  const auto& inv = spec.slots.at(slot);
  return std::any_of(inv.begin(), inv.end(), [](const SlotValue& v) { return v.values.size() > 1; });
}

// A filled slot occurrence.
struct Fill {
  std::string slot;
  std::string surface;
  std::string value;
};

struct Phrase {
  const Template* tmpl = nullptr;
  std::size_t variant = 0;
  std::vector<Fill> fills;  // one per placeholder of tmpl->mr
};

std::string render_mr(const Phrase& p) {
  std::string mr = p.tmpl->mr;
  for (const Fill& f : p.fills) mr = substitute(mr, f.slot, f.value);
  return mr;
}

std::string render_utterance(const Phrase& p) {
  std::string u = p.tmpl->utterances[p.variant];
  for (const Fill& f : p.fills) u = substitute(u, f.slot, f.surface);
  return u;
}

enum class SplitKind { kTrain, kHeldOut };

class Generator {
 public:
  Generator(const GrammarSpec& spec, RngStream rng, SplitKind kind)
      : spec_(spec), rng_(rng), kind_(kind) {}

  CorpusExample next() {
    const bool ambiguous = rng_.bernoulli(spec_.ambiguity_rate);
    const bool oov = rng_.bernoulli(spec_.oov_rate);
    const bool noisy = rng_.bernoulli(spec_.noise_rate);
    const Template* trig = nullptr;
    const Template* act = nullptr;
    for (int tries = 0;; ++tries) {
      require(tries < 10000, "corpus: no template pair satisfies the requested tags");
      trig = &spec_.triggers[rng_.below(spec_.triggers.size())];
      act = &spec_.actions[rng_.below(spec_.actions.size())];
      if (ambiguous && !has_slot(*trig, *act, true)) continue;
      if (oov && !has_slot(*trig, *act, false)) continue;
      break;
    }
    // Pick which occurrence carries the ambiguity or the unusual name.
    std::vector<std::string> slots = placeholders(trig->mr);
    const std::size_t split = slots.size();
    for (const std::string& s : placeholders(act->mr)) slots.push_back(s);
    const std::size_t amb_at = ambiguous ? pick(slots, [&](const std::string& s) {
      return ambiguous_slot(spec_, s);
    }) : slots.size();
    const std::size_t oov_at = oov ? pick(slots, [](const std::string& s) {
      return s == kPersonSlot;
    }) : slots.size();

    Phrase tp{trig, rng_.below(trig->utterances.size()), {}};
    Phrase ap{act, rng_.below(act->utterances.size()), {}};
    for (std::size_t i = 0; i < slots.size(); ++i) {
      Fill f = fill(slots[i], i == amb_at, i == oov_at);
      (i < split ? tp : ap).fills.push_back(std::move(f));
    }
    const std::string& pattern = spec_.patterns[rng_.below(spec_.patterns.size())];
    const std::string utterance = substitute(
        substitute(pattern, "trigger", render_utterance(tp)), "action", render_utterance(ap));
    if (noisy) corrupt(tp, ap);
    CorpusExample ex;
    ex.example.source = tokenize(utterance);
    ex.example.target = tokenize(render_mr(tp) + " THEN " + render_mr(ap));
    ex.ambiguous = ambiguous;
    ex.noisy = noisy;
    ex.oov = oov;
    return ex;
  }

 private:
  bool has_slot(const Template& a, const Template& b, bool want_ambiguous) const {
    for (const Template* t : {&a, &b}) {
      for (const std::string& s : placeholders(t->mr)) {
        if (want_ambiguous ? ambiguous_slot(spec_, s) : s == kPersonSlot) return true;
      }
    }
    return false;
  }

  template <typename Pred>
  std::size_t pick(const std::vector<std::string>& slots, Pred pred) {
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (pred(slots[i])) ok.push_back(i);
    }
    return ok[rng_.below(ok.size())];
  }

  Fill fill(const std::string& slot, bool ambiguous, bool oov) {
    if (slot == kPersonSlot) {
      const auto& pool = !oov ? spec_.common_names
                              : kind_ == SplitKind::kTrain ? spec_.rare_names : spec_.unseen_names;
      const std::string& name = pool[rng_.below(pool.size())];
      return {slot, name, name};
    }
    const auto& inv = spec_.slots.at(slot);
    std::vector<const SlotValue*> options;
    for (const SlotValue& v : inv) {
      if ((v.values.size() > 1) == ambiguous) options.push_back(&v);
    }
    const SlotValue& v = *options[rng_.below(options.size())];
    return {slot, v.surface, v.values[rng_.below(v.values.size())]};
  }

  // Changes one slot value in the MR, or the whole action when no slot can
  // take a different value.
  void corrupt(Phrase& tp, Phrase& ap) {
    std::vector<Fill*> candidates;
    for (Phrase* p : {&tp, &ap}) {
      for (Fill& f : p->fills) {
        if (f.slot != kPersonSlot) candidates.push_back(&f);
      }
    }
    if (!candidates.empty()) {
      Fill& f = *candidates[rng_.below(candidates.size())];
      std::vector<std::string> others;
      for (const SlotValue& v : spec_.slots.at(f.slot)) {
        for (const std::string& val : v.values) {
          if (val != f.value && std::find(others.begin(), others.end(), val) == others.end()) {
            others.push_back(val);
          }
        }
      }
      if (!others.empty()) {
        f.value = others[rng_.below(others.size())];
        return;
      }
    }
    const Template* old = ap.tmpl;
    while (ap.tmpl == old) ap.tmpl = &spec_.actions[rng_.below(spec_.actions.size())];
    ap.fills.clear();
    for (const std::string& s : placeholders(ap.tmpl->mr)) ap.fills.push_back(fill(s, false, false));
  }

  const GrammarSpec& spec_;
  RngStream rng_;
  SplitKind kind_;
};

const char* kSplitNames[] = {"train", "dev", "test"};

nlohmann::json tag_lists(const std::vector<CorpusExample>& split) {
  nlohmann::json amb = nlohmann::json::array(), noisy = nlohmann::json::array(),
                 oov = nlohmann::json::array();
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i].ambiguous) amb.push_back(i);
    if (split[i].noisy) noisy.push_back(i);
    if (split[i].oov) oov.push_back(i);
  }
  return {{"ambiguous", amb}, {"noisy", noisy}, {"oov", oov}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "corpus: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "corpus: cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), "corpus: write failed for " + path.string());
}

}  // namespace

void GrammarSpec::validate() const {
  require(!triggers.empty() && !actions.empty() && !patterns.empty(),
          "grammar: need triggers, actions and patterns");
  auto rate = [](double r, const char* what) {
    require(r >= 0.0 && r <= 1.0, std::string("grammar: ") + what + " must be in [0, 1]");
  };
  rate(ambiguity_rate, "ambiguity_rate");
  rate(noise_rate, "noise_rate");
  rate(oov_rate, "oov_rate");
  for (const std::string& p : patterns) {
    const auto ph = placeholders(p);
    require(std::count(ph.begin(), ph.end(), "trigger") == 1 &&
                std::count(ph.begin(), ph.end(), "action") == 1 && ph.size() == 2,
            "grammar: pattern must use {trigger} and {action} once: " + p);
  }
  bool any_ambiguous = false;
  bool any_person = false;
  for (const auto* list : {&triggers, &actions}) {
    for (const Template& t : *list) {
      require(!t.utterances.empty(), "grammar: template " + t.name + " has no utterances");
      const auto mr_slots = placeholders(t.mr);
      for (const std::string& s : mr_slots) {
        if (s == kPersonSlot) {
          require(!common_names.empty(), "grammar: no names for {person}");
          any_person = true;
          continue;
        }
        auto it = slots.find(s);
        require(it != slots.end() && !it->second.empty(),
                "grammar: template " + t.name + " uses unknown slot " + s);
        bool has_plain = false;
        for (const SlotValue& v : it->second) {
          require(!v.values.empty(), "grammar: slot " + s + " has a surface without values");
          has_plain |= v.values.size() == 1;
          if (v.values.size() > 1) {
            std::set<std::string> distinct(v.values.begin(), v.values.end());
            require(distinct.size() == v.values.size(),
                    "grammar: ambiguous surface \"" + v.surface + "\" repeats a value");
            any_ambiguous = true;
          }
        }
        require(has_plain, "grammar: slot " + s + " has no unambiguous values");
      }
      for (const std::string& u : t.utterances) {
        auto us = placeholders(u);
        auto ms = mr_slots;
        std::sort(us.begin(), us.end());
        std::sort(ms.begin(), ms.end());
        require(us == ms, "grammar: template " + t.name + " utterance and MR slots differ");
      }
    }
  }
  require(ambiguity_rate == 0.0 || any_ambiguous, "grammar: ambiguity requested but no ambiguous slot");
  require(oov_rate == 0.0 || (any_person && !rare_names.empty() && !unseen_names.empty()),
          "grammar: OOV requested but no name slot or pool");
  std::set<std::string> common(common_names.begin(), common_names.end());
  std::set<std::string> rare(rare_names.begin(), rare_names.end());
  for (const std::string& n : unseen_names) {
    require(!common.count(n) && !rare.count(n), "grammar: unseen name " + n + " also in a train pool");
  }
  for (const std::string& n : rare_names) {
    require(!common.count(n), "grammar: rare name " + n + " also a common name");
  }
}

GrammarSpec default_grammar() {
  GrammarSpec g;
  g.triggers = {
      {"every_day_at",
       {"every day at {time}", "daily at {time}", "at {time} every day"},
       "date_time.every_day_at ( time ( {time} ) )"},
      {"tomorrow_forecast",
       {"if the forecast says {condition} tomorrow", "when {condition} is forecast",
        "if tomorrow brings {condition}"},
       "weather.tomorrow_forecast ( condition ( {condition} ) )"},
      {"temperature_below",
       {"when the temperature drops below {degrees} degrees",
        "if it gets colder than {degrees} degrees"},
       "weather.temperature_below ( degrees ( {degrees} ) )"},
      {"temperature_above",
       {"when the temperature rises above {degrees} degrees",
        "if it gets warmer than {degrees} degrees"},
       "weather.temperature_above ( degrees ( {degrees} ) )"},
      {"new_photo",
       {"when i post a photo on {social}", "whenever i upload a picture to {social}"},
       "{social}.new_photo ( )"},
      {"new_email_from",
       {"when {person} emails me", "if i get an email from {person}"},
       "gmail.new_email_from ( sender ( {person} ) )"},
      {"enter_area",
       {"when i arrive at {place}", "when i get to {place}"},
       "location.enter_area ( area ( {place} ) )"},
      {"exit_area",
       {"when i leave {place}", "as soon as i leave {place}"},
       "location.exit_area ( area ( {place} ) )"},
  };
  g.actions = {
      {"turn_on", {"turn on the {device}", "switch on the {device}"},
       "hue.turn_on ( device ( {device} ) )"},
      {"turn_off", {"turn off the {device}", "switch off the {device}"},
       "hue.turn_off ( device ( {device} ) )"},
      {"send_message", {"send me a text saying {message}", "text me {message}"},
       "sms.send_message ( to ( me ) message ( {message} ) )"},
      {"post_tweet", {"post a tweet", "tweet about it"}, "twitter.post_tweet ( )"},
      {"set_temperature",
       {"set the thermostat to {degrees}", "change the heating to {degrees} degrees"},
       "nest.set_temperature ( degrees ( {degrees} ) )"},
      {"send_email", {"email {person}", "send an email to {person}"},
       "gmail.send_email ( to ( {person} ) )"},
      {"save_file", {"save it to {storage}", "back it up on {storage}"},
       "{storage}.save_file ( )"},
  };
  g.patterns = {"{action} {trigger}", "{trigger} , {action}", "{trigger} then {action}"};

  auto& time = g.slots["time"];
  for (int h = 1; h <= 12; ++h) {
    const std::string n = std::to_string(h);
    time.push_back({n + " am", {n + "_am"}});
    time.push_back({n + " pm", {n + "_pm"}});
    time.push_back({n + " in the morning", {n + "_am"}});
    time.push_back({n + " in the evening", {n + "_pm"}});
    time.push_back({n + " o'clock", {n + "_am", n + "_pm"}});
  }
  auto& degrees = g.slots["degrees"];
  for (int d = 0; d <= 40; d += 2) degrees.push_back({std::to_string(d), {std::to_string(d)}});
  g.slots["condition"] = {{"rain", {"rain"}}, {"snow", {"snow"}}, {"a storm", {"storm"}},
                          {"wind", {"wind"}}, {"fog", {"fog"}},   {"sunshine", {"sun"}}};
  g.slots["social"] = {{"instagram", {"instagram"}}, {"facebook", {"facebook"}},
                       {"flickr", {"flickr"}},       {"tumblr", {"tumblr"}}};
  g.slots["place"] = {{"home", {"home"}},          {"work", {"work"}},
                      {"the gym", {"gym"}},        {"school", {"school"}},
                      {"the office", {"office"}},  {"the station", {"station"}}};
  g.slots["device"] = {{"lamp", {"lamp"}},
                       {"desk lamp", {"desk_lamp"}},
                       {"porch light", {"porch_light"}},
                       {"kitchen light", {"kitchen_light"}},
                       {"bedroom light", {"bedroom_light"}},
                       {"light", {"porch_light", "kitchen_light", "bedroom_light"}}};
  g.slots["message"] = {{"wake up", {"wake_up"}},       {"good morning", {"good_morning"}},
                        {"on my way", {"on_my_way"}},   {"call me", {"call_me"}},
                        {"hello", {"hello"}},           {"take an umbrella", {"take_umbrella"}}};
  g.slots["storage"] = {{"dropbox", {"dropbox"}},
                        {"google drive", {"google_drive"}},
                        {"onedrive", {"onedrive"}},
                        {"box", {"box"}}};

  g.common_names = {"alice", "bob",  "carol", "dave", "erin", "frank", "grace",
                    "heidi", "ivan", "judy",  "kim",  "leo",  "mia",   "nina",
                    "oscar", "pam",  "quinn", "rose", "sam",  "tina"};
  std::vector<std::string> pool = syllable_names();
  std::erase_if(pool, [&](const std::string& n) {
    return std::find(g.common_names.begin(), g.common_names.end(), n) != g.common_names.end();
  });
  g.rare_names.assign(pool.begin(), pool.begin() + 800);
  g.unseen_names.assign(pool.begin() + 800, pool.begin() + 1200);
  return g;
}

CorpusSplit generate_corpus(const GrammarSpec& spec, const CorpusSizes& sizes) {
  spec.validate();
  require(sizes.train >= 200 && sizes.dev >= 50 && sizes.test >= 50,
          "corpus: sizes must be at least 200/50/50");
  CorpusSplit out;
  std::set<std::string> seen;
  const RngStream root(spec.seed);
  const std::size_t counts[] = {sizes.train, sizes.dev, sizes.test};
  std::vector<CorpusExample>* dest[] = {&out.train, &out.dev, &out.test};
  for (int s = 0; s < 3; ++s) {
    Generator gen(spec, root.fork(static_cast<std::uint64_t>(s)),
                  s == 0 ? SplitKind::kTrain : SplitKind::kHeldOut);
    std::size_t failures = 0;
    while (dest[s]->size() < counts[s]) {
      CorpusExample ex = gen.next();
      if (!seen.insert(join(ex.example.source)).second) {
        require(++failures < 100000, "corpus: grammar too small for the requested sizes");
        continue;
      }
      dest[s]->push_back(std::move(ex));
    }
  }

  nlohmann::json counts_json, tags_json;
  for (int s = 0; s < 3; ++s) {
    const nlohmann::json tags = tag_lists(*dest[s]);
    counts_json[kSplitNames[s]] = {{"examples", dest[s]->size()},
                                   {"ambiguous", tags["ambiguous"].size()},
                                   {"noisy", tags["noisy"].size()},
                                   {"oov", tags["oov"].size()}};
    tags_json[kSplitNames[s]] = tags;
  }
  out.manifest = {{"format", "confparse-corpus"},
                  {"grammar_version", spec.version},
                  {"seed", spec.seed},
                  {"sizes", {{"train", sizes.train}, {"dev", sizes.dev}, {"test", sizes.test}}},
                  {"rates",
                   {{"ambiguity", spec.ambiguity_rate},
                    {"noise", spec.noise_rate},
                    {"oov", spec.oov_rate}}},
                  {"counts", counts_json},
                  {"tags", tags_json}};
  return out;
}

std::vector<Example> examples_of(const std::vector<CorpusExample>& split) {
  std::vector<Example> out;
  out.reserve(split.size());
  for (const CorpusExample& e : split) out.push_back(e.example);
  return out;
}

std::string format_tsv(const std::vector<CorpusExample>& split) {
  std::string out;
  for (const CorpusExample& e : split) {
    out += join(e.example.source);
    out += '\t';
    out += join(e.example.target);
    out += '\n';
  }
  return out;
}

std::vector<Example> parse_tsv(std::string_view text, const std::string& name) {
  std::vector<Example> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string where = name + ":" + std::to_string(line_no) + ": ";
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(where + "expected utterance<TAB>mr");
    if (line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(where + "tab inside a field");
    }
    Example ex{tokenize(line.substr(0, tab)), tokenize(line.substr(tab + 1))};
    if (ex.source.empty() || ex.target.empty()) throw Error(where + "empty field");
    out.push_back(std::move(ex));
  }
  return out;
}

void save_corpus(const CorpusSplit& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<CorpusExample>* splits[] = {&corpus.train, &corpus.dev, &corpus.test};
  for (int s = 0; s < 3; ++s) {
    write_file(dir / (std::string(kSplitNames[s]) + ".tsv"), format_tsv(*splits[s]));
  }
  write_file(dir / "manifest.json", corpus.manifest.dump(1) + "\n");
}

CorpusSplit load_corpus(const std::filesystem::path& dir) {
  CorpusSplit out;
  try {
    out.manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("corpus: bad manifest: " + std::string(e.what()));
  }
  require(out.manifest.value("format", "") == "confparse-corpus", "corpus: not a corpus manifest");
  std::vector<CorpusExample>* splits[] = {&out.train, &out.dev, &out.test};
  for (int s = 0; s < 3; ++s) {
    const std::string file = std::string(kSplitNames[s]) + ".tsv";
    for (Example& e : parse_tsv(read_file(dir / file), file)) {
      splits[s]->push_back({std::move(e), false, false, false});
    }
    const auto& tags = out.manifest.at("tags").at(kSplitNames[s]);
    auto apply = [&](const char* key, bool CorpusExample::*flag) {
      for (std::size_t i : tags.at(key).get<std::vector<std::size_t>>()) {
        require(i < splits[s]->size(), "corpus: manifest tag index out of range in " + file);
        (*splits[s])[i].*flag = true;
      }
    };
    apply("ambiguous", &CorpusExample::ambiguous);
    apply("noisy", &CorpusExample::noisy);
    apply("oov", &CorpusExample::oov);
    require(out.manifest.at("counts").at(kSplitNames[s]).at("examples").get<std::size_t>() ==
                splits[s]->size(),
            "corpus: " + file + " does not match the manifest count");
  }
  return out;
}

}  // namespace confparse
