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


#include "evonorm/evonorm.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "codec.hpp"
#include "config.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "runner.hpp"
#include "zoo.hpp"

struct evn_config {
  evonorm::RunConfig value;
};

struct evn_graph {
  evonorm::LayerGraph value;
};

namespace {

thread_local std::string g_last_error;

evn_status ToStatus(evonorm::ErrorCode code) {
  using evonorm::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return EVN_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return EVN_ERR_SHAPE_MISMATCH;
    case ErrorCode::kGroupDivisibility: return EVN_ERR_GROUP_DIVISIBILITY;
    case ErrorCode::kParse: return EVN_ERR_PARSE;
    case ErrorCode::kUnknownName: return EVN_ERR_UNKNOWN_NAME;
    case ErrorCode::kConfig: return EVN_ERR_CONFIG;
    case ErrorCode::kIo: return EVN_ERR_IO;
    case ErrorCode::kInternal: return EVN_ERR_INTERNAL;
  }
  return EVN_ERR_INTERNAL;
}

template <typename F>
evn_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return EVN_OK;
  } catch (const evonorm::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const nlohmann::json::parse_error& e) {
    g_last_error = e.what();
    return EVN_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return EVN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EVN_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return EVN_ERR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) evonorm::Fail(evonorm::ErrorCode::kInvalidArgument, what);
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const std::string& s) { *out = Dup(s); }

void Emit(char** out, const nlohmann::json& j) { *out = Dup(j.dump(2)); }

std::vector<evonorm::AnchorKind> ParseAnchorList(const char* text) {
  std::vector<evonorm::AnchorKind> out;
  if (!text) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(evonorm::ParseAnchor(item));
  }
  return out;
}

}  // namespace

extern "C" {

const char* evn_version(void) { return EVONORM_VERSION; }

const char* evn_status_name(evn_status status) {
  switch (status) {
    case EVN_OK: return "ok";
    case EVN_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case EVN_ERR_SHAPE_MISMATCH: return "shape_mismatch";
    case EVN_ERR_GROUP_DIVISIBILITY: return "group_divisibility";
    case EVN_ERR_PARSE: return "parse";
    case EVN_ERR_UNKNOWN_NAME: return "unknown_name";
    case EVN_ERR_CONFIG: return "config";
    case EVN_ERR_IO: return "io";
    case EVN_ERR_INTERNAL: return "internal";
  }
  return "unknown_status";
}

const char* evn_last_error(void) { return g_last_error.c_str(); }

void evn_string_free(char* s) { std::free(s); }

evn_status evn_config_new(const char* preset, evn_config** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = new evn_config{evonorm::Preset(preset ? preset : "desk")};
  });
}

void evn_config_free(evn_config* config) { delete config; }

evn_status evn_config_merge_json(evn_config* config, const char* json) {
  return Guard([&] {
    Require(config && json, "config and json must be non-null");
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      evonorm::Fail(evonorm::ErrorCode::kParse,
                    std::string("config is not valid JSON: ") + e.what());
    }
    config->value = evonorm::MergeConfig(config->value, patch);
  });
}

evn_status evn_config_to_json(const evn_config* config, char** out_json) {
  return Guard([&] {
    Require(config && out_json, "config and out_json must be non-null");
    Emit(out_json, evonorm::ConfigToJson(config->value));
  });
}

evn_status evn_config_check(const evn_config* config) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    evonorm::CheckRunConfig(config->value);
  });
}

evn_status evn_preset_names(char** out_json) {
  return Guard([&] {
    Require(out_json != nullptr, "out_json is null");
    Emit(out_json, nlohmann::json(evonorm::PresetNames()));
  });
}

evn_status evn_zoo_names(char** out_json) {
  return Guard([&] {
    Require(out_json != nullptr, "out_json is null");
    Emit(out_json, nlohmann::json(evonorm::ZooNames()));
  });
}

evn_status evn_zoo_describe(const char* name, int groups, char** out_json) {
  return Guard([&] {
    Require(name && out_json, "name and out_json must be non-null");
    const evonorm::ZooEntry e = evonorm::Zoo(name, groups);
    Emit(out_json, nlohmann::json{{"name", e.name},
                                  {"expression", evonorm::RenderExpression(e.graph)},
                                  {"description", e.description},
                                  {"groups", e.groups},
                                  {"graph", evonorm::GraphToJson(e.graph)}});
  });
}

evn_status evn_graph_from_zoo(const char* name, int groups, evn_graph** out) {
  return Guard([&] {
    Require(name && out, "name and out must be non-null");
    *out = new evn_graph{evonorm::Zoo(name, groups).graph};
  });
}

evn_status evn_graph_from_json(const char* json, evn_graph** out) {
  return Guard([&] {
    Require(json && out, "json and out must be non-null");
    *out = new evn_graph{evonorm::DeserializeGraph(json)};
  });
}

evn_status evn_graph_resolve(const char* spec, int groups, evn_graph** out) {
  return Guard([&] {
    Require(spec && out, "spec and out must be non-null");
    *out = new evn_graph{evonorm::ResolveLayer(spec, groups)};
  });
}

void evn_graph_free(evn_graph* graph) { delete graph; }

evn_status evn_graph_to_json(const evn_graph* graph, char** out_json) {
  return Guard([&] {
    Require(graph && out_json, "graph and out_json must be non-null");
    Emit(out_json, evonorm::SerializeGraph(graph->value));
  });
}

evn_status evn_graph_render(const evn_graph* graph, char** out_text) {
  return Guard([&] {
    Require(graph && out_text, "graph and out_text must be non-null");
    Emit(out_text, evonorm::RenderExpression(graph->value));
  });
}

evn_status evn_graph_validate(const evn_graph* graph, char** out_json) {
  return Guard([&] {
    Require(graph && out_json, "graph and out_json must be non-null");
    const evonorm::ValidationReport r = evonorm::Validate(graph->value);
    Emit(out_json, nlohmann::json{{"ok", r.ok},
                                  {"reasons", r.reasons},
                                  {"batch_dependent", r.batch_dependent},
                                  {"depends_on_x", r.depends_on_x}});
  });
}

evn_status evn_run_search(const evn_config* config, int random_baseline,
                          char** out_summary) {
  return Guard([&] {
    Require(config && out_summary, "config and out_summary must be non-null");
    evonorm::ConfigureAllocator();
    Emit(out_summary, evonorm::RunSearch(config->value, random_baseline != 0));
  });
}

evn_status evn_run_survey(const evn_config* config, int count, char** out_summary) {
  return Guard([&] {
    Require(config && out_summary, "config and out_summary must be non-null");
    Require(count >= 0, "survey count must be >= 0");
    evonorm::ConfigureAllocator();
    Emit(out_summary, evonorm::RunSurvey(config->value, count));
  });
}

evn_status evn_run_eval(const evn_config* config, const char* layer, const char* anchors,
                        char** out_summary) {
  return Guard([&] {
    Require(config && layer && out_summary, "config, layer and out_summary must be non-null");
    evonorm::ConfigureAllocator();
    Emit(out_summary, evonorm::RunEval(config->value, layer, ParseAnchorList(anchors)));
  });
}

evn_status evn_run_stress(const evn_config* config, const char* layer, const char* anchor,
                          char** out_summary) {
  return Guard([&] {
    Require(config && layer && out_summary, "config, layer and out_summary must be non-null");
    evonorm::ConfigureAllocator();
    const evonorm::AnchorKind kind =
        anchor && *anchor ? evonorm::ParseAnchor(anchor) : evonorm::AnchorKind::kR;
    Emit(out_summary, evonorm::RunStress(config->value, layer, kind));
  });
}

evn_status evn_run_rank(const evn_config* config, const char* candidates_path,
                        char** out_summary) {
  return Guard([&] {
    Require(config && candidates_path && out_summary,
            "config, candidates_path and out_summary must be non-null");
    evonorm::ConfigureAllocator();
    Emit(out_summary, evonorm::RunRank(config->value, candidates_path));
  });
}

evn_status evn_run_gradcheck(double tolerance, uint64_t seed, int* out_all_passed,
                             char** out_summary) {
  return Guard([&] {
    Require(out_summary != nullptr, "out_summary is null");
    Require(tolerance > 0, "tolerance must be positive");
    evonorm::GradcheckOptions options;
    options.tolerance = tolerance;
    options.seed = seed;
    const nlohmann::json summary = evonorm::RunGradcheck(options);
    if (out_all_passed) *out_all_passed = summary.at("all_passed").get<bool>() ? 1 : 0;
    Emit(out_summary, summary);
  });
}

}  // extern "C"
