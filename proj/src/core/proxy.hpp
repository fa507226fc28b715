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


// The proxy task tying data, anchors, rejection and training together:
// the candidate evaluator used by search, reranking of top candidates on
// enlarged anchors, and the random-layer survey.

#ifndef EVONORM_CORE_PROXY_HPP_
#define EVONORM_CORE_PROXY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "anchor.hpp"
#include "dataset.hpp"
#include "evolution.hpp"
#include "graph.hpp"
#include "rejection.hpp"
#include "train.hpp"

namespace evonorm {

struct ProxyConfig {
  std::vector<AnchorKind> anchors{AnchorKind::kR, AnchorKind::kM, AnchorKind::kE};
  double width_multiplier = 1.0;
  int groups = 8;
  TrainConfig train;  // full training that produces the scores
  QualityConfig quality;
  StabilityConfig stability;
  bool rejection = true;
};

// Throws Error(kConfig) when the group count does not divide every layer
// site of every anchor, or when no anchor is listed.
void CheckProxyConfig(const ProxyConfig& config);

// Quality test on the first anchor, stability test, then full training on
// every anchor. Cost is counted in gradient evaluations: one per training
// step and two per ascent step.
class ProxyEvaluator {
 public:
  ProxyEvaluator(const ProxyConfig& config, const Dataset& data);

  EvaluationOutcome operator()(const LayerGraph& graph, std::uint64_t seed) const;

  // Full training on every anchor; validation accuracy per anchor.
  std::vector<double> Scores(const LayerGraph& graph, std::uint64_t seed) const;

  const ProxyConfig& config() const { return config_; }

 private:
  ProxyConfig config_;
  const Split& train_;
  const Split& validation_;
  ProbeBatch probe_;
};

struct RerankConfig {
  int top_k = 10;
  double width_multiplier = 2.0;  // relative to the proxy anchors
  double step_factor = 2.0;
  double train_fraction = 0.9;
};

struct RerankEntry {
  int input_position = 0;
  int id = 0;
  LayerGraph graph;
  std::vector<double> accuracies;  // per anchor, on the held-out rows
  double mean = 0.0;
};

struct RerankInput {
  int id = 0;
  LayerGraph graph;
};

// Trains every input on the enlarged anchors using the first
// `train_fraction` of the training split, scores it on the rest of the
// training split, and sorts by mean accuracy (stable). The validation split
// is never read.
std::vector<RerankEntry> Rerank(const std::vector<RerankInput>& inputs,
                                const ProxyConfig& proxy,
                                const RerankConfig& config, const Dataset& data,
                                std::uint64_t seed, int workers);

struct SurveyResult {
  std::vector<LayerGraph> graphs;
  std::vector<std::vector<double>> accuracies;  // [graph][anchor]
};

// Fully trains `count` random graphs on every anchor, without rejection.
SurveyResult Survey(int count, const ProxyConfig& proxy,
                    const GenerationOptions& generation, const Dataset& data,
                    std::uint64_t seed, int workers);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

// Equal-width bins over [0, 1]; the last bin is closed.
std::vector<HistogramBin> AccuracyHistogram(const std::vector<double>& values,
                                            int bins = 20);

}  // namespace evonorm

#endif  // EVONORM_CORE_PROXY_HPP_
