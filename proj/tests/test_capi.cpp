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

// Exercises the shared library through its C interface only.

#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "evonorm/evonorm.h"

namespace {

using nlohmann::json;

// Takes ownership of a library-allocated string.
std::string Take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  evn_string_free(s);
  return out;
}

struct Config {
  evn_config* ptr = nullptr;
  explicit Config(const char* preset) { REQUIRE(evn_config_new(preset, &ptr) == EVN_OK); }
  ~Config() { evn_config_free(ptr); }
};

std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("evonorm_capi_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// Micro preset shrunk to a few steps, writing into `dir`.
void Shrink(Config& c, const std::filesystem::path& dir) {
  const json patch = {{"output_dir", dir.string()},
                      {"workers", 1},
                      {"rejection", false},
                      {"train", {{"steps", 5}}},
                      {"quality", {{"steps", 5}}},
                      {"stability", {{"max_ascent_steps", 3}}},
                      {"evolution", {{"budget", 6}}},
                      {"rerank", {{"top_k", 2}, {"step_factor", 1.0}, {"width_multiplier", 1.0}}}};
  REQUIRE(evn_config_merge_json(c.ptr, patch.dump().c_str()) == EVN_OK);
}

TEST_CASE("version and status names") {
  CHECK(std::string(evn_version()).size() > 0);
  CHECK(std::string(evn_status_name(EVN_OK)) == "ok");
  CHECK(std::string(evn_status_name(EVN_ERR_CONFIG)) == "config");
  CHECK(std::string(evn_status_name(static_cast<evn_status>(99))) == "unknown_status");
}

TEST_CASE("config lifecycle") {
  evn_config* c = nullptr;
  CHECK(evn_config_new("huge", &c) == EVN_ERR_UNKNOWN_NAME);
  CHECK(c == nullptr);
  CHECK(std::string(evn_last_error()).find("desk") != std::string::npos);
  CHECK(evn_config_new("desk", nullptr) == EVN_ERR_INVALID_ARGUMENT);

  Config micro("micro");
  CHECK(evn_config_check(micro.ptr) == EVN_OK);
  char* text = nullptr;
  REQUIRE(evn_config_to_json(micro.ptr, &text) == EVN_OK);
  const json j = json::parse(Take(text));
  CHECK(j["preset"] == "micro");
  CHECK(j["groups"] == 4);

  CHECK(evn_config_merge_json(micro.ptr, R"({"train": {"stepz": 1}})") == EVN_ERR_CONFIG);
  CHECK(std::string(evn_last_error()).find("train.stepz") != std::string::npos);
  CHECK(evn_config_merge_json(micro.ptr, "{not json") == EVN_ERR_PARSE);
  CHECK(evn_config_merge_json(micro.ptr, R"({"groups": 3})") == EVN_OK);
  CHECK(evn_config_check(micro.ptr) == EVN_ERR_CONFIG);

  REQUIRE(evn_preset_names(&text) == EVN_OK);
  CHECK(json::parse(Take(text)) == json{"desk", "micro"});
  evn_config_free(nullptr);
}

TEST_CASE("zoo and graphs") {
  char* text = nullptr;
  REQUIRE(evn_zoo_names(&text) == EVN_OK);
  const json names = json::parse(Take(text));
  CHECK(names.size() == 38);

  REQUIRE(evn_zoo_describe("evonorm_b0", 8, &text) == EVN_OK);
  const json b0 = json::parse(Take(text));
  CHECK(b0["expression"] == "x / max(s_bwh(x), v1*x + s_wh(x)) * gamma + beta");

  evn_graph* g = nullptr;
  REQUIRE(evn_graph_from_zoo("evonorm_s0", 4, &g) == EVN_OK);
  REQUIRE(evn_graph_to_json(g, &text) == EVN_OK);
  const std::string serialized = Take(text);
  evn_graph* back = nullptr;
  REQUIRE(evn_graph_from_json(serialized.c_str(), &back) == EVN_OK);
  REQUIRE(evn_graph_render(back, &text) == EVN_OK);
  CHECK(Take(text) == "x * sigmoid(v1*x) / s_whcg(x) * gamma + beta");
  REQUIRE(evn_graph_validate(back, &text) == EVN_OK);
  const json report = json::parse(Take(text));
  CHECK(report["ok"] == true);
  CHECK(report["batch_dependent"] == false);
  evn_graph_free(back);
  evn_graph_free(g);

  CHECK(evn_graph_from_zoo("nonexistent", 8, &g) == EVN_ERR_UNKNOWN_NAME);
  CHECK(evn_graph_from_json(R"({"nodes": [{"op": "frobnicate"}]})", &g) == EVN_ERR_PARSE);
  CHECK(std::string(evn_last_error()).find("frobnicate") != std::string::npos);
  CHECK(evn_graph_resolve("nonexistent", 8, &g) == EVN_ERR_UNKNOWN_NAME);

  const auto dir = TempDir("graph");
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "layer.json").string();
  std::ofstream(path) << serialized;
  REQUIRE(evn_graph_resolve(path.c_str(), 4, &g) == EVN_OK);
  REQUIRE(evn_graph_render(g, &text) == EVN_OK);
  CHECK(Take(text) == "x * sigmoid(v1*x) / s_whcg(x) * gamma + beta");
  evn_graph_free(g);
  std::filesystem::remove_all(dir);
}

TEST_CASE("gradient check through the library") {
  int all_passed = 0;
  char* text = nullptr;
  REQUIRE(evn_run_gradcheck(1e-6, 0, &all_passed, &text) == EVN_OK);
  const json summary = json::parse(Take(text));
  CHECK(all_passed == 1);
  CHECK(summary["all_passed"] == true);
  CHECK(summary["cases"].size() > 38);
}

TEST_CASE("commands write their outputs") {
  const auto dir = TempDir("commands");
  Config c("micro");
  Shrink(c, dir);
  char* text = nullptr;

  REQUIRE(evn_run_search(c.ptr, 0, &text) == EVN_OK);
  const json search = json::parse(Take(text));
  CHECK(search["attempted"] == 6);
  for (const char* f : {"candidates.jsonl", "progress.csv", "rejection.csv", "top10.json",
                        "manifest.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const json manifest = json::parse(std::ifstream(dir / "manifest.json"));
  CHECK(manifest["command"] == "search");
  CHECK(manifest["config"]["preset"] == "micro");

  REQUIRE(evn_run_rank(c.ptr, (dir / "candidates.jsonl").string().c_str(), &text) == EVN_OK);
  const json rank = json::parse(Take(text));
  CHECK(std::filesystem::exists(dir / "rerank.json"));
  CHECK(rank["ranked"].size() == 2);

  REQUIRE(evn_run_eval(c.ptr, "bn_relu", "R", &text) == EVN_OK);
  const json eval = json::parse(Take(text));
  CHECK(eval["results"].contains("R"));
  CHECK_FALSE(eval["results"].contains("M"));

  REQUIRE(evn_run_stress(c.ptr, "bn_relu", "R", &text) == EVN_OK);
  Take(text);
  std::ifstream trace(dir / "stress_trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == "step,grad_norm,loss");

  REQUIRE(evn_run_survey(c.ptr, 2, &text) == EVN_OK);
  const json survey = json::parse(Take(text));
  CHECK(std::filesystem::exists(dir / "survey.csv"));
  CHECK(survey.contains("median_accuracy"));

  CHECK(evn_run_eval(c.ptr, "nonexistent", nullptr, &text) == EVN_ERR_UNKNOWN_NAME);
  CHECK(evn_run_stress(c.ptr, "bn_relu", "Q", &text) != EVN_OK);
  CHECK(evn_run_rank(c.ptr, (dir / "missing.jsonl").string().c_str(), &text) == EVN_ERR_IO);
  CHECK(evn_run_search(nullptr, 0, &text) == EVN_ERR_INVALID_ARGUMENT);
  std::filesystem::remove_all(dir);
}

}  // namespace
