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


#include "runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "codec.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "searchlog.hpp"
#include "zoo.hpp"

#ifndef EVONORM_BUILD_ID
#define EVONORM_BUILD_ID "unknown"
#endif

namespace evonorm {

using nlohmann::json;

namespace {

constexpr std::uint64_t kEvalTag = 41;
constexpr std::uint64_t kRankTag = 51;

std::string OutPath(const RunConfig& config, const std::string& file) {
  return (std::filesystem::path(config.output_dir) / file).string();
}

void WriteManifest(const RunConfig& config, const std::string& command, json extra,
                   const std::vector<std::string>& files) {
  json m;
  m["command"] = command;
  m["build"] = BuildIdentifier();
  m["config"] = ConfigToJson(config);
  m["seeds"] = {{"master", config.seed}, {"data", config.data_seed}};
  m["outputs"] = files;
  for (auto& [key, value] : extra.items()) m[key] = value;
  WriteTextFile(OutPath(config, "manifest.json"), m.dump(2) + "\n");
}

json AnchorNames(const std::vector<AnchorKind>& anchors) {
  json out = json::array();
  for (AnchorKind k : anchors) out.push_back(AnchorName(k));
  return out;
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string BuildIdentifier() { return EVONORM_BUILD_ID; }

LayerGraph ResolveLayer(const std::string& spec, int groups) {
  if (IsZooName(spec)) return Zoo(spec, groups).graph;
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) {
    std::ifstream in(spec);
    std::stringstream text;
    text << in.rdbuf();
    if (!in) Fail(ErrorCode::kIo, "cannot read " + spec);
    try {
      return DeserializeGraph(text.str());
    } catch (const Error& e) {
      Fail(e.code(), spec + ": " + e.what());
    }
  }
  std::string names;
  for (const std::string& n : ZooNames()) names += (names.empty() ? "" : ", ") + n;
  Fail(ErrorCode::kUnknownName,
       "unknown layer '" + spec + "' (not a zoo name or a file); valid names: " + names);
}

json RunSearch(const RunConfig& config, bool random_baseline) {
  CheckRunConfig(config);
  const ProxyConfig proxy = EffectiveProxy(config);
  const EvolutionConfig evolution = EffectiveEvolution(config);
  const Dataset data = LoadDataset(config);
  const ProxyEvaluator evaluator(proxy, data);
  const int anchors = static_cast<int>(proxy.anchors.size());
  const SearchLog log = random_baseline ? RandomSearch(evolution, evaluator, anchors)
                                        : Evolve(evolution, evaluator, anchors);

  std::ostringstream candidates;
  WriteCandidatesJsonl(candidates, log);
  std::ostringstream progress;
  WriteProgressCsv(progress, log, proxy.anchors);
  std::ostringstream rejection;
  WriteRejectionCsv(rejection, log);
  const json top10 = Top10Json(log, proxy.anchors);
  WriteTextFile(OutPath(config, "candidates.jsonl"), candidates.str());
  WriteTextFile(OutPath(config, "progress.csv"), progress.str());
  WriteTextFile(OutPath(config, "rejection.csv"), rejection.str());
  WriteTextFile(OutPath(config, "top10.json"), top10.dump(2) + "\n");

  json summary;
  summary["command"] = random_baseline ? "random-search" : "search";
  summary["attempted"] = log.candidates.size();
  summary["survivors"] = log.survivors;
  summary["cost"] = log.cost;
  summary["rejected_cost"] = log.rejected_cost;
  summary["top10_mean_fitness"] = Top10MeanFitness(log);
  const auto top = TopCandidates(log, 1);
  summary["best"] = top.empty() ? json(nullptr)
                                : json{{"id", top[0]->id},
                                       {"expression", RenderExpression(top[0]->graph)},
                                       {"mean_score", top[0]->MeanScore()}};
  WriteManifest(config, summary["command"], {{"summary", summary}},
                {"candidates.jsonl", "progress.csv", "rejection.csv", "top10.json"});
  return summary;
}

json RunSurvey(const RunConfig& config, int count) {
  CheckRunConfig(config);
  const ProxyConfig proxy = EffectiveProxy(config);
  const EvolutionConfig evolution = EffectiveEvolution(config);
  const Dataset data = LoadDataset(config);
  const SurveyResult survey =
      Survey(count, proxy, evolution.generation, data, config.seed, evolution.workers);

  std::vector<std::string> files;
  std::ostringstream table;
  table << "index";
  for (AnchorKind k : proxy.anchors) table << ",accuracy_" << AnchorName(k);
  table << ",expression\n";
  for (int i = 0; i < count; ++i) {
    table << i;
    for (double a : survey.accuracies[i]) table << ',' << FormatDouble(a);
    table << ",\"" << RenderExpression(survey.graphs[i]) << "\"\n";
  }
  WriteTextFile(OutPath(config, "survey.csv"), table.str());
  files.push_back("survey.csv");

  json medians = json::object();
  for (std::size_t k = 0; k < proxy.anchors.size(); ++k) {
    std::vector<double> column;
    for (const auto& row : survey.accuracies) column.push_back(row[k]);
    std::ostringstream hist;
    hist << "bin_lo,bin_hi,count\n";
    for (const HistogramBin& b : AccuracyHistogram(column)) {
      hist << FormatDouble(b.lo) << ',' << FormatDouble(b.hi) << ',' << b.count << '\n';
    }
    const std::string name = std::string("survey_hist_") + AnchorName(proxy.anchors[k]) + ".csv";
    WriteTextFile(OutPath(config, name), hist.str());
    files.push_back(name);
    medians[AnchorName(proxy.anchors[k])] = Median(column);
  }
  // Graphs that clear the quality threshold on some anchors but not others.
  int disagreements = 0;
  for (const auto& row : survey.accuracies) {
    const double thr = proxy.quality.accuracy_threshold;
    const bool any = std::any_of(row.begin(), row.end(), [thr](double a) { return a >= thr; });
    const bool all = std::all_of(row.begin(), row.end(), [thr](double a) { return a >= thr; });
    disagreements += any && !all;
  }
  json summary = {{"command", "survey"},
                  {"count", count},
                  {"anchors", AnchorNames(proxy.anchors)},
                  {"median_accuracy", medians},
                  {"anchor_disagreements", disagreements}};
  WriteManifest(config, "survey", {{"summary", summary}}, files);
  return summary;
}

json RunEval(const RunConfig& config, const std::string& layer,
             const std::vector<AnchorKind>& anchors) {
  CheckRunConfig(config);
  const LayerGraph graph = ResolveLayer(layer, config.proxy.groups);
  ProxyConfig proxy = EffectiveProxy(config);
  if (!anchors.empty()) proxy.anchors = anchors;
  CheckProxyConfig(proxy);
  const Dataset data = LoadDataset(config);
  json results = json::object();
  for (std::size_t k = 0; k < proxy.anchors.size(); ++k) {
    const AnchorSpec spec = MakeAnchorSpec(proxy.anchors[k], proxy.width_multiplier);
    const TrainReport report = TrainEval(spec, graph, data.train(), data.validation(),
                                         proxy.train, DeriveSeed(config.seed, kEvalTag, k));
    results[AnchorName(proxy.anchors[k])] = {
        {"accuracy", report.accuracy},
        {"steps", report.steps},
        {"non_finite", report.non_finite},
        {"final_loss", report.loss_trace.empty() ? json(nullptr)
                                                 : json(report.loss_trace.back())}};
  }
  json summary = {{"command", "eval"},
                  {"layer", layer},
                  {"expression", RenderExpression(graph)},
                  {"graph", GraphToJson(graph)},
                  {"results", results}};
  WriteTextFile(OutPath(config, "eval.json"), summary.dump(2) + "\n");
  WriteManifest(config, "eval", {{"layer", layer}}, {"eval.json"});
  return summary;
}

json RunStress(const RunConfig& config, const std::string& layer, AnchorKind anchor) {
  CheckRunConfig(config);
  const LayerGraph graph = ResolveLayer(layer, config.proxy.groups);
  const ProxyConfig proxy = EffectiveProxy(config);
  const Dataset data = LoadDataset(config);
  const ProbeBatch probe = MakeProbeBatch(data.train(), proxy.stability.probe_batch);
  const AnchorSpec spec = MakeAnchorSpec(anchor, proxy.width_multiplier);
  const StabilityResult result = StabilityTest(graph, spec, probe, proxy.stability,
                                               config.seed, proxy.train.ema_momentum);
  std::ostringstream trace;
  trace << "step,grad_norm,loss\n";
  for (std::size_t i = 0; i < result.grad_norms.size(); ++i) {
    trace << i << ',' << FormatDouble(result.grad_norms[i]) << ','
          << FormatDouble(i < result.losses.size() ? result.losses[i] : NAN) << '\n';
  }
  WriteTextFile(OutPath(config, "stress_trace.csv"), trace.str());
  json summary = {{"command", "stress"},
                  {"layer", layer},
                  {"anchor", AnchorName(anchor)},
                  {"expression", RenderExpression(graph)},
                  {"passed", result.passed},
                  {"peak_grad_norm", FormatDouble(result.peak_grad_norm)},
                  {"steps_to_blowup", result.steps_to_blowup ? json(*result.steps_to_blowup)
                                                             : json(nullptr)},
                  {"ascent_steps", result.grad_norms.size()}};
  WriteManifest(config, "stress", {{"summary", summary}}, {"stress_trace.csv"});
  return summary;
}

json RunRank(const RunConfig& config, const std::string& candidates_path) {
  CheckRunConfig(config);
  const std::vector<Candidate> all = ReadCandidatesJsonl(candidates_path);
  std::vector<const Candidate*> evaluated;
  for (const Candidate& c : all) {
    if (c.status == CandidateStatus::kEvaluated) evaluated.push_back(&c);
  }
  std::stable_sort(evaluated.begin(), evaluated.end(),
                   [](const Candidate* a, const Candidate* b) {
                     return a->MeanScore() > b->MeanScore();
                   });
  if (evaluated.size() > static_cast<std::size_t>(config.rerank.top_k)) {
    evaluated.resize(config.rerank.top_k);
  }
  if (evaluated.empty()) {
    Fail(ErrorCode::kInvalidArgument, candidates_path + " holds no evaluated candidates");
  }
  std::vector<RerankInput> inputs;
  for (const Candidate* c : evaluated) inputs.push_back({c->id, c->graph});
  const ProxyConfig proxy = EffectiveProxy(config);
  const Dataset data = LoadDataset(config);
  const std::vector<RerankEntry> ranked =
      Rerank(inputs, proxy, config.rerank, data, DeriveSeed(config.seed, kRankTag),
             EffectiveWorkers(config));
  json list = json::array();
  int rank = 1;
  for (const RerankEntry& e : ranked) {
    json acc = json::object();
    for (std::size_t k = 0; k < proxy.anchors.size(); ++k) {
      acc[AnchorName(proxy.anchors[k])] = e.accuracies[k];
    }
    list.push_back({{"rank", rank++},
                    {"id", e.id},
                    {"search_rank", e.input_position + 1},
                    {"expression", RenderExpression(e.graph)},
                    {"accuracies", acc},
                    {"mean", e.mean}});
  }
  json summary = {{"command", "rank"}, {"input", candidates_path}, {"ranked", list}};
  WriteTextFile(OutPath(config, "rerank.json"), summary.dump(2) + "\n");
  WriteManifest(config, "rank", {{"input", candidates_path}}, {"rerank.json"});
  return summary;
}

json RunGradcheck(const GradcheckOptions& options) {
  json cases = json::array();
  bool all = true;
  for (const GradcheckResult& r : RunGradcheckSuite(options)) {
    all = all && r.passed;
    cases.push_back({{"name", r.name},
                     {"relative_error", FormatDouble(r.relative_error)},
                     {"kink_margin", FormatDouble(r.kink_margin)},
                     {"attempts", r.attempts},
                     {"passed", r.passed}});
  }
  return {{"command", "gradcheck"},
          {"tolerance", options.tolerance},
          {"step", options.step},
          {"all_passed", all},
          {"cases", cases}};
}

}  // namespace evonorm
