// Copyright 2026 The EvoNorm Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"
#include "parallel.hpp"

namespace evonorm {

using nlohmann::json;

const char* SearchModeName(SearchMode m) {
  return m == SearchMode::kBatch ? "batch" : "sample";
}

SearchMode ParseSearchMode(const std::string& name) {
  if (name == "batch") return SearchMode::kBatch;
  if (name == "sample") return SearchMode::kSample;
  Fail(ErrorCode::kConfig, "mode must be 'batch' or 'sample', got '" + name + "'");
}

std::vector<std::string> PresetNames() { return {"desk", "micro"}; }

RunConfig Preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "desk") return c;
  if (name == "micro") {
    // Small enough for a budget-300 search per core in minutes. The noise is
    // raised so that good layers do not all saturate at 100% accuracy.
    c.data.image_size = 8;
    c.data.train = 1024;
    c.data.validation = 256;
    c.data.noise = 1.5;
    c.proxy.width_multiplier = 0.5;
    c.proxy.groups = 4;
    c.proxy.train.steps = 150;
    c.proxy.train.batch = 16;
    c.proxy.train.lr = 0.05;
    c.proxy.train.ema_momentum = 0.9;
    c.proxy.quality.train = c.proxy.train;
    c.proxy.quality.train.steps = 100;
    c.sample_steps = 300;
    c.evolution.generation.groups = 4;
    return c;
  }
  std::string list;
  for (const std::string& n : PresetNames()) list += (list.empty() ? "" : ", ") + n;
  Fail(ErrorCode::kUnknownName, "unknown preset '" + name + "'; valid presets: " + list);
}

namespace {

// Reads one JSON object, recording which keys were consumed so that stray
// keys can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) Fail(ErrorCode::kConfig, Where("") + "must be an object");
  }

  bool Has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
            v.get<std::int64_t>() < 0) {
          throw std::invalid_argument("expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      Fail(ErrorCode::kConfig, Where(key) + e.what());
    }
  }

  const json* Child(const std::string& key) {
    if (!Has(key)) return nullptr;
    return &j_.at(key);
  }

  std::string PathOf(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) Fail(ErrorCode::kConfig, "unknown config key '" + PathOf(key) + "'");
    }
  }

 private:
  std::string Where(const std::string& key) const {
    return "config key '" + (key.empty() ? path_ : PathOf(key)) + "': ";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json TrainToJson(const TrainConfig& t) {
  return {{"steps", t.steps},
          {"batch", t.batch},
          {"lr", t.lr},
          {"warmup", t.warmup},
          {"momentum", t.sgd.momentum},
          {"weight_decay", t.sgd.weight_decay},
          {"nesterov", t.sgd.nesterov},
          {"ema_momentum", t.ema_momentum},
          {"eval_batch", t.eval_batch}};
}

void TrainFromJson(const json& j, const std::string& path, TrainConfig& t) {
  ObjectReader r(j, path);
  r.Get("steps", t.steps);
  r.Get("batch", t.batch);
  r.Get("lr", t.lr);
  r.Get("warmup", t.warmup);
  r.Get("momentum", t.sgd.momentum);
  r.Get("weight_decay", t.sgd.weight_decay);
  r.Get("nesterov", t.sgd.nesterov);
  r.Get("ema_momentum", t.ema_momentum);
  r.Get("eval_batch", t.eval_batch);
  r.Finish();
}

void Require(bool ok, const std::string& message) {
  if (!ok) Fail(ErrorCode::kConfig, message);
}

void CheckTrain(const TrainConfig& t, const std::string& path) {
  Require(t.steps >= 0, path + ".steps must be >= 0");
  Require(t.batch >= 1, path + ".batch must be >= 1");
  Require(t.eval_batch >= 1, path + ".eval_batch must be >= 1");
  Require(std::isfinite(t.lr) && t.lr > 0, path + ".lr must be positive");
  Require(t.warmup >= 0, path + ".warmup must be >= 0");
  Require(t.sgd.momentum >= 0 && t.sgd.momentum < 1, path + ".momentum must lie in [0, 1)");
  Require(t.sgd.weight_decay >= 0, path + ".weight_decay must be >= 0");
  Require(t.ema_momentum >= 0 && t.ema_momentum < 1,
          path + ".ema_momentum must lie in [0, 1)");
}

}  // namespace

json ConfigToJson(const RunConfig& c) {
  json anchors = json::array();
  for (AnchorKind k : c.proxy.anchors) anchors.push_back(AnchorName(k));
  const StabilityConfig& s = c.proxy.stability;
  const QualityConfig& q = c.proxy.quality;
  const EvolutionConfig& e = c.evolution;
  json j;
  j["preset"] = c.preset;
  j["mode"] = SearchModeName(c.mode);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["data"] = {{"image_size", c.data.image_size},
               {"train", c.data.train},
               {"validation", c.data.validation},
               {"noise", c.data.noise},
               {"frequency", c.data.frequency},
               {"seed", c.data_seed},
               {"cifar_dir", c.cifar_dir}};
  j["anchors"] = anchors;
  j["width_multiplier"] = c.proxy.width_multiplier;
  j["groups"] = c.proxy.groups;
  j["train"] = TrainToJson(c.proxy.train);
  j["sample_steps"] = c.sample_steps;
  j["rejection"] = c.proxy.rejection;
  j["quality"] = TrainToJson(q.train);
  j["quality"]["threshold"] = q.accuracy_threshold;
  j["stability"] = {{"max_ascent_steps", s.max_ascent_steps},
                    {"norm_threshold", s.norm_threshold},
                    {"step_size", s.step_size},
                    {"probe_batch", s.probe_batch},
                    {"hvp_step", s.hvp_step ? json(*s.hvp_step) : json(nullptr)}};
  j["evolution"] = {{"budget", e.budget},
                    {"tournament_fraction", e.tournament_fraction},
                    {"mutations_per_offspring", e.mutations_per_offspring},
                    {"random_replacement_prob", e.random_replacement_prob},
                    {"window", e.window},
                    {"criterion", CriterionName(e.criterion)},
                    {"initial_random", e.initial_random},
                    {"offspring_batch", e.offspring_batch},
                    {"intermediate_nodes", e.generation.intermediate_count}};
  j["rerank"] = {{"top_k", c.rerank.top_k},
                 {"width_multiplier", c.rerank.width_multiplier},
                 {"step_factor", c.rerank.step_factor},
                 {"train_fraction", c.rerank.train_fraction}};
  return j;
}

RunConfig MergeConfig(const RunConfig& base, const json& patch) {
  ObjectReader r(patch, "");
  RunConfig c = base;
  if (r.Has("preset")) {
    std::string name;
    r.Get("preset", name);
    c = Preset(name);
  }
  if (r.Has("mode")) {
    std::string mode;
    r.Get("mode", mode);
    c.mode = ParseSearchMode(mode);
  }
  r.Get("seed", c.seed);
  r.Get("output_dir", c.output_dir);
  r.Get("workers", c.workers);
  if (const json* d = r.Child("data")) {
    ObjectReader dr(*d, "data");
    dr.Get("image_size", c.data.image_size);
    dr.Get("train", c.data.train);
    dr.Get("validation", c.data.validation);
    dr.Get("noise", c.data.noise);
    dr.Get("frequency", c.data.frequency);
    dr.Get("seed", c.data_seed);
    dr.Get("cifar_dir", c.cifar_dir);
    dr.Finish();
  }
  if (const json* a = r.Child("anchors")) {
    if (!a->is_array()) Fail(ErrorCode::kConfig, "config key 'anchors': expected an array");
    c.proxy.anchors.clear();
    for (const json& name : *a) {
      if (!name.is_string()) {
        Fail(ErrorCode::kConfig, "config key 'anchors': expected anchor names");
      }
      try {
        c.proxy.anchors.push_back(ParseAnchor(name.get<std::string>()));
      } catch (const Error& e) {
        Fail(ErrorCode::kConfig, std::string("config key 'anchors': ") + e.what());
      }
    }
  }
  r.Get("width_multiplier", c.proxy.width_multiplier);
  if (r.Has("groups")) {
    r.Get("groups", c.proxy.groups);
    c.evolution.generation.groups = c.proxy.groups;
  }
  if (const json* t = r.Child("train")) TrainFromJson(*t, "train", c.proxy.train);
  r.Get("sample_steps", c.sample_steps);
  r.Get("rejection", c.proxy.rejection);
  if (const json* q = r.Child("quality")) {
    json rest = *q;
    if (rest.is_object() && rest.contains("threshold")) {
      const json& t = rest.at("threshold");
      if (!t.is_number()) Fail(ErrorCode::kConfig, "config key 'quality.threshold': expected a number");
      c.proxy.quality.accuracy_threshold = t.get<double>();
      rest.erase("threshold");
    }
    TrainFromJson(rest, "quality", c.proxy.quality.train);
  }
  if (const json* s = r.Child("stability")) {
    ObjectReader sr(*s, "stability");
    StabilityConfig& st = c.proxy.stability;
    sr.Get("max_ascent_steps", st.max_ascent_steps);
    sr.Get("norm_threshold", st.norm_threshold);
    sr.Get("step_size", st.step_size);
    sr.Get("probe_batch", st.probe_batch);
    if (sr.Has("hvp_step")) {
      const json& h = s->at("hvp_step");
      if (h.is_null()) {
        st.hvp_step.reset();
      } else {
        double v = 0;
        sr.Get("hvp_step", v);
        st.hvp_step = v;
      }
    }
    sr.Finish();
  }
  if (const json* e = r.Child("evolution")) {
    ObjectReader er(*e, "evolution");
    EvolutionConfig& ev = c.evolution;
    er.Get("budget", ev.budget);
    er.Get("tournament_fraction", ev.tournament_fraction);
    er.Get("mutations_per_offspring", ev.mutations_per_offspring);
    er.Get("random_replacement_prob", ev.random_replacement_prob);
    er.Get("window", ev.window);
    if (er.Has("criterion")) {
      std::string name;
      er.Get("criterion", name);
      try {
        ev.criterion = ParseCriterion(name);
      } catch (const Error& err) {
        Fail(ErrorCode::kConfig, std::string("config key 'evolution.criterion': ") + err.what());
      }
    }
    er.Get("initial_random", ev.initial_random);
    er.Get("offspring_batch", ev.offspring_batch);
    er.Get("intermediate_nodes", ev.generation.intermediate_count);
    er.Finish();
  }
  if (const json* k = r.Child("rerank")) {
    ObjectReader kr(*k, "rerank");
    kr.Get("top_k", c.rerank.top_k);
    kr.Get("width_multiplier", c.rerank.width_multiplier);
    kr.Get("step_factor", c.rerank.step_factor);
    kr.Get("train_fraction", c.rerank.train_fraction);
    kr.Finish();
  }
  r.Finish();
  return c;
}

void CheckRunConfig(const RunConfig& c) {
  Require(c.workers >= 0, "workers must be >= 0");
  Require(c.data.image_size >= 4, "data.image_size must be >= 4");
  Require(c.data.train >= 1 && c.data.validation >= 1, "data split sizes must be positive");
  Require(c.data.noise >= 0, "data.noise must be >= 0");
  Require(std::isfinite(c.proxy.width_multiplier) && c.proxy.width_multiplier > 0,
          "width_multiplier must be positive");
  Require(c.sample_steps >= 0, "sample_steps must be >= 0");
  CheckTrain(c.proxy.train, "train");
  CheckTrain(c.proxy.quality.train, "quality");
  const double thr = c.proxy.quality.accuracy_threshold;
  Require(thr > 0 && thr < 1, "quality.threshold must lie in (0, 1)");
  const StabilityConfig& s = c.proxy.stability;
  Require(s.max_ascent_steps >= 0, "stability.max_ascent_steps must be >= 0");
  Require(s.norm_threshold > 0, "stability.norm_threshold must be positive");
  Require(s.step_size > 0, "stability.step_size must be positive");
  Require(s.probe_batch >= 1, "stability.probe_batch must be >= 1");
  Require(!s.hvp_step || *s.hvp_step > 0, "stability.hvp_step must be positive");
  const EvolutionConfig& e = c.evolution;
  Require(e.budget >= 0, "evolution.budget must be >= 0");
  Require(e.tournament_fraction > 0 && e.tournament_fraction <= 1,
          "evolution.tournament_fraction must lie in (0, 1]");
  Require(e.mutations_per_offspring >= 1, "evolution.mutations_per_offspring must be >= 1");
  Require(e.random_replacement_prob >= 0 && e.random_replacement_prob <= 1,
          "evolution.random_replacement_prob must lie in [0, 1]");
  Require(e.window >= 1, "evolution.window must be >= 1");
  Require(e.initial_random >= 0, "evolution.initial_random must be >= 0");
  Require(e.offspring_batch >= 1, "evolution.offspring_batch must be >= 1");
  Require(e.generation.intermediate_count >= 1 &&
              e.generation.intermediate_count <= kDefaultIntermediateNodes,
          "evolution.intermediate_nodes must lie in [1, 10]");
  Require(c.rerank.top_k >= 1, "rerank.top_k must be >= 1");
  Require(c.rerank.width_multiplier > 0 && c.rerank.step_factor > 0,
          "rerank.width_multiplier and rerank.step_factor must be positive");
  Require(c.rerank.train_fraction > 0 && c.rerank.train_fraction < 1,
          "rerank.train_fraction must lie in (0, 1)");
  CheckProxyConfig(EffectiveProxy(c));
}

ProxyConfig EffectiveProxy(const RunConfig& c) {
  ProxyConfig p = c.proxy;
  p.train.schedule = Schedule::kConstant;
  if (c.mode == SearchMode::kSample) {
    p.train.schedule = Schedule::kCosine;
    p.train.steps = c.sample_steps;
  }
  return p;
}

EvolutionConfig EffectiveEvolution(const RunConfig& c) {
  EvolutionConfig e = c.evolution;
  e.seed = c.seed;
  e.workers = EffectiveWorkers(c);
  e.generation.groups = c.proxy.groups;
  e.generation.batch_independent = c.mode == SearchMode::kSample;
  return e;
}

int EffectiveWorkers(const RunConfig& c) {
  return c.workers > 0 ? c.workers : DefaultWorkerCount();
}

Dataset LoadDataset(const RunConfig& c) {
  if (!c.cifar_dir.empty()) return LoadCifar10(c.cifar_dir);
  return MakeSyntheticDataset(c.data, c.data_seed);
}

}  // namespace evonorm
