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


#include "evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "train.hpp"

namespace evonorm {

namespace {

constexpr std::uint64_t kBreedTag = 21;
constexpr std::uint64_t kEvalTag = 22;
constexpr int kTopK = 10;

bool Dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return false;
    if (a[k] > b[k]) strict = true;
  }
  return strict;
}

void CheckConfig(const EvolutionConfig& c) {
  auto bad = [](const std::string& what) { Fail(ErrorCode::kConfig, what); };
  if (c.budget < 0) bad("budget must be >= 0");
  if (!(c.tournament_fraction > 0.0 && c.tournament_fraction <= 1.0)) {
    bad("tournament_fraction must lie in (0, 1]");
  }
  if (c.mutations_per_offspring < 0) bad("mutations_per_offspring must be >= 0");
  if (!(c.random_replacement_prob >= 0.0 && c.random_replacement_prob <= 1.0)) {
    bad("random_replacement_prob must lie in [0, 1]");
  }
  if (c.window < 1) bad("window must be >= 1");
  if (c.initial_random < 0) bad("initial_random must be >= 0");
  if (c.offspring_batch < 1) bad("offspring_batch must be >= 1");
  if (c.generation.intermediate_count < 1) bad("intermediate_count must be >= 1");
}

ProgressRow MakeProgressRow(const Population& population, int attempted,
                            int survivors, double cost, int num_anchors) {
  ProgressRow row;
  row.attempted = attempted;
  row.survivors = survivors;
  row.cost = cost;
  row.best.assign(num_anchors, 0.0);
  row.top10_mean.assign(num_anchors, 0.0);
  if (population.empty()) return row;
  std::vector<int> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return population[a].MeanScore() > population[b].MeanScore();
  });
  for (int i = 0; i < population.size(); ++i) {
    for (int k = 0; k < num_anchors; ++k) {
      row.best[k] = std::max(row.best[k], population[i].scores[k]);
    }
  }
  const int top = std::min<int>(kTopK, population.size());
  for (int r = 0; r < top; ++r) {
    const Candidate& c = population[order[r]];
    for (int k = 0; k < num_anchors; ++k) row.top10_mean[k] += c.scores[k] / top;
    row.top10_fitness += c.MeanScore() / top;
  }
  row.best_fitness = population[order[0]].MeanScore();
  return row;
}

enum class Mode { kEvolve, kRandom };

SearchLog Run(const EvolutionConfig& config, const CandidateEvaluator& evaluate,
              int num_anchors, Mode mode) {
  CheckConfig(config);
  if (num_anchors < 1) Fail(ErrorCode::kConfig, "at least one anchor is required");
  SearchLog log;
  Population population(config.window);
  int next = 0;
  while (next < config.budget) {
    const int count = std::min(config.offspring_batch, config.budget - next);
    // Breeding reads only the snapshot taken at the start of the round.
    std::vector<Candidate> batch(count);
    for (int j = 0; j < count; ++j) {
      const int id = next + j;
      Candidate& c = batch[j];
      c.id = id;
      c.seed = DeriveSeed(config.seed, kEvalTag, id);
      std::mt19937_64 rng(DeriveSeed(config.seed, kBreedTag, id));
      if (mode == Mode::kRandom) {
        c.origin = Origin::kRandom;
        c.graph = GenerateRandom(rng, config.generation);
      } else if (id < config.initial_random || population.empty()) {
        c.origin = Origin::kInitial;
        c.graph = GenerateRandom(rng, config.generation);
      } else {
        const Candidate& parent = population[SelectWinner(
            population, rng, config.criterion, config.tournament_fraction)];
        LayerGraph child = parent.graph;
        for (int m = 0; m < config.mutations_per_offspring; ++m) {
          child = Mutate(child, rng, config.generation);
        }
        std::bernoulli_distribution replace(config.random_replacement_prob);
        if (replace(rng)) {
          c.origin = Origin::kReplacement;
          c.graph = GenerateRandom(rng, config.generation);
        } else {
          c.origin = Origin::kMutation;
          c.parent = parent.id;
          c.graph = std::move(child);
        }
      }
    }
    std::vector<EvaluationOutcome> outcomes(count);
    ParallelFor(count, config.workers, [&](int j) {
      outcomes[j] = evaluate(batch[j].graph, batch[j].seed);
    });
    for (int j = 0; j < count; ++j) {
      Candidate& c = batch[j];
      EvaluationOutcome& out = outcomes[j];
      c.status = out.status;
      c.verdict = out.verdict;
      c.cost = out.cost;
      log.cost += out.cost;
      if (c.status == CandidateStatus::kEvaluated) {
        if (static_cast<int>(out.scores.size()) != num_anchors) {
          Fail(ErrorCode::kInternal, "evaluator returned " +
                                         std::to_string(out.scores.size()) +
                                         " scores for " +
                                         std::to_string(num_anchors) + " anchors");
        }
        c.scores = std::move(out.scores);
        ++log.survivors;
        population.Insert(c);
      } else {
        log.rejected_cost += out.cost;
      }
      log.candidates.push_back(std::move(c));
      log.progress.push_back(MakeProgressRow(population, next + j + 1,
                                             log.survivors, log.cost, num_anchors));
    }
    next += count;
  }
  return log;
}

}  // namespace

const char* CriterionName(Criterion c) {
  return c == Criterion::kPareto ? "pareto" : "average";
}

Criterion ParseCriterion(const std::string& name) {
  if (name == "pareto") return Criterion::kPareto;
  if (name == "average") return Criterion::kAverage;
  Fail(ErrorCode::kConfig, "unknown criterion '" + name + "'; use pareto or average");
}

const char* StatusName(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::kPending: return "pending";
    case CandidateStatus::kRejectedQuality: return "rejected_quality";
    case CandidateStatus::kRejectedStability: return "rejected_stability";
    case CandidateStatus::kEvaluated: return "evaluated";
  }
  return "?";
}

CandidateStatus ParseStatus(const std::string& name) {
  for (auto s : {CandidateStatus::kPending, CandidateStatus::kRejectedQuality,
                 CandidateStatus::kRejectedStability, CandidateStatus::kEvaluated}) {
    if (name == StatusName(s)) return s;
  }
  Fail(ErrorCode::kParse, "unknown candidate status '" + name + "'");
}

const char* OriginName(Origin o) {
  switch (o) {
    case Origin::kInitial: return "initial";
    case Origin::kMutation: return "mutation";
    case Origin::kReplacement: return "replacement";
    case Origin::kRandom: return "random";
  }
  return "?";
}

Origin ParseOrigin(const std::string& name) {
  for (auto o : {Origin::kInitial, Origin::kMutation, Origin::kReplacement,
                 Origin::kRandom}) {
    if (name == OriginName(o)) return o;
  }
  Fail(ErrorCode::kParse, "unknown candidate origin '" + name + "'");
}

std::vector<int> ParetoFront(const std::vector<std::vector<double>>& scores) {
  if (scores.empty()) return {};
  const std::size_t dim = scores.front().size();
  if (dim == 0) Fail(ErrorCode::kInvalidArgument, "score vectors must be non-empty");
  for (const auto& s : scores) {
    if (s.size() != dim) {
      Fail(ErrorCode::kShapeMismatch, "score vectors differ in length");
    }
  }
  std::vector<int> front;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < scores.size() && !dominated; ++j) {
      dominated = j != i && Dominates(scores[j], scores[i]);
    }
    if (!dominated) front.push_back(static_cast<int>(i));
  }
  return front;
}

double Candidate::MeanScore() const {
  if (scores.empty()) return 0.0;
  return std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
}

Population::Population(int capacity) : capacity_(capacity) {
  if (capacity < 1) Fail(ErrorCode::kConfig, "population capacity must be >= 1");
}

void Population::Insert(Candidate candidate) {
  members_.push_back(std::move(candidate));
  while (static_cast<int>(members_.size()) > capacity_) members_.pop_front();
}

int SelectWinner(const Population& population, std::mt19937_64& rng,
                 Criterion criterion, double fraction) {
  if (population.empty()) {
    Fail(ErrorCode::kInvalidArgument, "cannot select from an empty population");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    Fail(ErrorCode::kConfig, "tournament fraction must lie in (0, 1]");
  }
  const int size = population.size();
  const int k = std::clamp(static_cast<int>(std::ceil(fraction * size)), 1, size);
  std::vector<int> all(size);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> entrants;
  entrants.reserve(k);
  std::sample(all.begin(), all.end(), std::back_inserter(entrants), k, rng);
  if (criterion == Criterion::kAverage) {
    int best = entrants.front();
    for (int e : entrants) {
      // Entrants are in window order, so strict > keeps the earliest.
      if (population[e].MeanScore() > population[best].MeanScore()) best = e;
    }
    return best;
  }
  std::vector<std::vector<double>> scores;
  scores.reserve(k);
  for (int e : entrants) scores.push_back(population[e].scores);
  const std::vector<int> front = ParetoFront(scores);
  std::uniform_int_distribution<std::size_t> pick(0, front.size() - 1);
  return entrants[front[pick(rng)]];
}

SearchLog Evolve(const EvolutionConfig& config, const CandidateEvaluator& evaluate,
                 int num_anchors) {
  return Run(config, evaluate, num_anchors, Mode::kEvolve);
}

SearchLog RandomSearch(const EvolutionConfig& config,
                       const CandidateEvaluator& evaluate, int num_anchors) {
  return Run(config, evaluate, num_anchors, Mode::kRandom);
}

std::vector<const Candidate*> TopCandidates(const SearchLog& log, int k) {
  std::vector<const Candidate*> evaluated;
  for (const Candidate& c : log.candidates) {
    if (c.status == CandidateStatus::kEvaluated) evaluated.push_back(&c);
  }
  std::stable_sort(evaluated.begin(), evaluated.end(),
                   [](const Candidate* a, const Candidate* b) {
                     return a->MeanScore() > b->MeanScore();
                   });
  if (static_cast<int>(evaluated.size()) > k) evaluated.resize(std::max(k, 0));
  return evaluated;
}

double Top10MeanFitness(const SearchLog& log) {
  const auto top = TopCandidates(log, kTopK);
  if (top.empty()) return 0.0;
  double sum = 0.0;
  for (const Candidate* c : top) sum += c->MeanScore();
  return sum / top.size();
}

}  // namespace evonorm
