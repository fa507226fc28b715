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


// Resolved run configuration: presets, JSON round trip with strict key
// checking, and the per-mode effective module configs.

#ifndef EVONORM_CORE_CONFIG_HPP_
#define EVONORM_CORE_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "evolution.hpp"
#include "proxy.hpp"

namespace evonorm {

enum class SearchMode { kBatch, kSample };

const char* SearchModeName(SearchMode m);
SearchMode ParseSearchMode(const std::string& name);

struct RunConfig {
  std::string preset = "desk";
  SearchMode mode = SearchMode::kBatch;
  std::uint64_t seed = 0;
  std::string output_dir = "evonorm_run";
  int workers = 0;  // 0 defers to EVONORM_WORKERS, else 1

  // Data. An empty cifar_dir selects the synthetic set.
  SyntheticConfig data;
  std::uint64_t data_seed = 1;
  std::string cifar_dir;

  // proxy.train.steps and schedule are the batch-mode values; sample mode
  // uses sample_steps with a cosine schedule.
  ProxyConfig proxy;
  int sample_steps = 2000;

  EvolutionConfig evolution;
  RerankConfig rerank;
};

std::vector<std::string> PresetNames();
// Throws Error(kUnknownName) for names outside PresetNames().
RunConfig Preset(const std::string& name);

nlohmann::json ConfigToJson(const RunConfig& config);
// Overlays `patch` onto `base`. Unknown keys and ill-typed values throw
// Error(kConfig) naming the offending path. A "preset" key restarts from
// that preset before the rest of the patch applies.
RunConfig MergeConfig(const RunConfig& base, const nlohmann::json& patch);
// Range checks across sections; throws Error(kConfig).
void CheckRunConfig(const RunConfig& config);

// Module configs after applying the mode: sample mode forces batch
// independence, the cosine schedule and sample_steps.
ProxyConfig EffectiveProxy(const RunConfig& config);
EvolutionConfig EffectiveEvolution(const RunConfig& config);
int EffectiveWorkers(const RunConfig& config);

Dataset LoadDataset(const RunConfig& config);

}  // namespace evonorm

#endif  // EVONORM_CORE_CONFIG_HPP_
