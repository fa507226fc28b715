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


#include "proxy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "error.hpp"
#include "parallel.hpp"

namespace evonorm {

namespace {

constexpr std::uint64_t kFullTrainTag = 31;
constexpr std::uint64_t kRerankTag = 32;
constexpr std::uint64_t kSurveyGraphTag = 33;
constexpr std::uint64_t kSurveyTrainTag = 34;

}  // namespace

void CheckProxyConfig(const ProxyConfig& config) {
  if (config.anchors.empty()) Fail(ErrorCode::kConfig, "no anchors configured");
  if (config.groups < 1) Fail(ErrorCode::kConfig, "groups must be >= 1");
  if (config.train.steps < 0 || config.train.batch < 1) {
    Fail(ErrorCode::kConfig, "train steps must be >= 0 and batch >= 1");
  }
  for (AnchorKind kind : config.anchors) {
    const AnchorSpec spec = MakeAnchorSpec(kind, config.width_multiplier);
    for (int channels : LayerSiteChannels(spec)) {
      if (channels % config.groups != 0) {
        Fail(ErrorCode::kConfig,
             std::to_string(config.groups) + " groups do not divide a " +
                 std::to_string(channels) + "-channel layer site of anchor " +
                 AnchorName(kind) + " at width multiplier " +
                 std::to_string(config.width_multiplier));
      }
    }
  }
}

ProxyEvaluator::ProxyEvaluator(const ProxyConfig& config, const Dataset& data)
    : config_(config),
      train_(data.train()),
      validation_(data.validation()),
      probe_(MakeProbeBatch(train_, config.stability.probe_batch)) {
  CheckProxyConfig(config_);
}

std::vector<double> ProxyEvaluator::Scores(const LayerGraph& graph,
                                           std::uint64_t seed) const {
  std::vector<double> scores;
  for (std::size_t k = 0; k < config_.anchors.size(); ++k) {
    const AnchorSpec spec = MakeAnchorSpec(config_.anchors[k], config_.width_multiplier);
    const TrainReport report = TrainEval(spec, graph, train_, validation_, config_.train,
                                         DeriveSeed(seed, kFullTrainTag, k));
    scores.push_back(report.accuracy);
  }
  return scores;
}

EvaluationOutcome ProxyEvaluator::operator()(const LayerGraph& graph,
                                             std::uint64_t seed) const {
  EvaluationOutcome out;
  if (config_.rejection) {
    const AnchorSpec primary =
        MakeAnchorSpec(config_.anchors.front(), config_.width_multiplier);
    const QualityResult q =
        QualityTest(graph, primary, train_, validation_, config_.quality, seed);
    out.verdict.quality_accuracy = q.accuracy;
    out.verdict.quality_passed = q.passed;
    out.cost += config_.quality.train.steps;
    if (!q.passed) {
      out.status = CandidateStatus::kRejectedQuality;
      return out;
    }
    const StabilityResult s = StabilityTest(graph, primary, probe_, config_.stability,
                                            seed, config_.quality.train.ema_momentum);
    out.verdict.stability_run = true;
    out.verdict.stability_passed = s.passed;
    out.verdict.peak_grad_norm = s.peak_grad_norm;
    out.verdict.steps_to_blowup = s.steps_to_blowup;
    out.cost += 2.0 * static_cast<double>(s.grad_norms.size());
    if (!s.passed) {
      out.status = CandidateStatus::kRejectedStability;
      return out;
    }
  }
  out.verdict.passed = true;
  out.scores = Scores(graph, seed);
  out.cost += static_cast<double>(config_.train.steps) * config_.anchors.size();
  out.status = CandidateStatus::kEvaluated;
  return out;
}

std::vector<RerankEntry> Rerank(const std::vector<RerankInput>& inputs,
                                const ProxyConfig& proxy,
                                const RerankConfig& config, const Dataset& data,
                                std::uint64_t seed, int workers) {
  if (config.top_k < 1) Fail(ErrorCode::kConfig, "rerank top_k must be >= 1");
  if (!(config.width_multiplier > 0) || !(config.step_factor > 0)) {
    Fail(ErrorCode::kConfig, "rerank width_multiplier and step_factor must be positive");
  }
  ProxyConfig enlarged = proxy;
  enlarged.width_multiplier = proxy.width_multiplier * config.width_multiplier;
  enlarged.train.steps =
      static_cast<int>(std::lround(proxy.train.steps * config.step_factor));
  CheckProxyConfig(enlarged);
  const auto [fit, held_out] = Partition(data.train(), config.train_fraction);

  const int n = static_cast<int>(std::min<std::size_t>(inputs.size(), config.top_k));
  const int anchors = static_cast<int>(enlarged.anchors.size());
  std::vector<RerankEntry> entries(n);
  for (int i = 0; i < n; ++i) {
    entries[i].input_position = i;
    entries[i].id = inputs[i].id;
    entries[i].graph = inputs[i].graph;
    entries[i].accuracies.assign(anchors, 0.0);
  }
  // One job per (candidate, anchor) pair.
  ParallelFor(n * anchors, workers, [&](int job) {
    const int i = job / anchors;
    const int k = job % anchors;
    const AnchorSpec spec = MakeAnchorSpec(enlarged.anchors[k], enlarged.width_multiplier);
    const TrainReport report =
        TrainEval(spec, entries[i].graph, fit, held_out, enlarged.train,
                  DeriveSeed(seed, kRerankTag, static_cast<std::uint64_t>(i) * 16 + k));
    entries[i].accuracies[k] = report.accuracy;
  });
  for (RerankEntry& e : entries) {
    double sum = 0.0;
    for (double a : e.accuracies) sum += a;
    e.mean = sum / anchors;
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RerankEntry& a, const RerankEntry& b) { return a.mean > b.mean; });
  return entries;
}

SurveyResult Survey(int count, const ProxyConfig& proxy,
                    const GenerationOptions& generation, const Dataset& data,
                    std::uint64_t seed, int workers) {
  if (count < 0) Fail(ErrorCode::kConfig, "survey count must be >= 0");
  CheckProxyConfig(proxy);
  SurveyResult result;
  result.graphs.resize(count);
  result.accuracies.assign(count, std::vector<double>(proxy.anchors.size(), 0.0));
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, kSurveyGraphTag, i));
    result.graphs[i] = GenerateRandom(rng, generation);
  }
  const Split& train = data.train();
  const Split& validation = data.validation();
  const int anchors = static_cast<int>(proxy.anchors.size());
  ParallelFor(count * anchors, workers, [&](int job) {
    const int i = job / anchors;
    const int k = job % anchors;
    const AnchorSpec spec = MakeAnchorSpec(proxy.anchors[k], proxy.width_multiplier);
    const TrainReport report =
        TrainEval(spec, result.graphs[i], train, validation, proxy.train,
                  DeriveSeed(seed, kSurveyTrainTag, static_cast<std::uint64_t>(i) * 16 + k));
    result.accuracies[i][k] = report.accuracy;
  });
  return result;
}

std::vector<HistogramBin> AccuracyHistogram(const std::vector<double>& values,
                                            int bins) {
  if (bins < 1) Fail(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
  std::vector<HistogramBin> out(bins);
  for (int b = 0; b < bins; ++b) {
    out[b].lo = static_cast<double>(b) / bins;
    out[b].hi = static_cast<double>(b + 1) / bins;
  }
  for (double v : values) {
    const int b = std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
    ++out[b].count;
  }
  return out;
}

}  // namespace evonorm
