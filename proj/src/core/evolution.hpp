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


// Regularized tournament evolution over layer graphs, with Pareto or
// average-score winner selection, and the random-search baseline that
// shares its pipeline and log format.

#ifndef EVONORM_CORE_EVOLUTION_HPP_
#define EVONORM_CORE_EVOLUTION_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rejection.hpp"

namespace evonorm {

enum class Criterion { kPareto, kAverage };

const char* CriterionName(Criterion c);
Criterion ParseCriterion(const std::string& name);

// Indices (ascending) of the vectors not dominated by any other: j dominates
// i when it is >= in every component and > in at least one.
std::vector<int> ParetoFront(const std::vector<std::vector<double>>& scores);

enum class CandidateStatus { kPending, kRejectedQuality, kRejectedStability, kEvaluated };

const char* StatusName(CandidateStatus s);
CandidateStatus ParseStatus(const std::string& name);

enum class Origin { kInitial, kMutation, kReplacement, kRandom };

const char* OriginName(Origin o);
Origin ParseOrigin(const std::string& name);

struct Candidate {
  int id = 0;
  LayerGraph graph;
  std::vector<double> scores;  // one per anchor once evaluated
  CandidateStatus status = CandidateStatus::kPending;
  std::optional<int> parent;
  Origin origin = Origin::kInitial;
  std::uint64_t seed = 0;  // evaluation seed
  RejectionVerdict verdict;
  double cost = 0.0;  // training-step equivalents spent on this candidate

  double MeanScore() const;
};

// Sliding window of the most recent evaluated candidates, oldest first.
class Population {
 public:
  explicit Population(int capacity);

  void Insert(Candidate candidate);
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  int capacity() const { return capacity_; }
  const Candidate& operator[](int i) const { return members_[i]; }
  const std::deque<Candidate>& members() const { return members_; }

 private:
  int capacity_;
  std::deque<Candidate> members_;
};

// Draws ceil(fraction * size) distinct members uniformly. Average picks the
// highest mean score (earliest inserted on ties); Pareto draws uniformly
// from the tournament's Pareto front. Returns a window position.
int SelectWinner(const Population& population, std::mt19937_64& rng,
                 Criterion criterion, double fraction);

struct EvolutionConfig {
  int budget = 300;  // candidates attempted, survivors or not
  double tournament_fraction = 0.05;
  int mutations_per_offspring = 2;
  double random_replacement_prob = 0.5;
  int window = 2500;
  Criterion criterion = Criterion::kPareto;
  int initial_random = 20;
  // Offspring bred per round from one population snapshot; fixes the
  // results independently of the worker count.
  int offspring_batch = 8;
  GenerationOptions generation;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EvaluationOutcome {
  CandidateStatus status = CandidateStatus::kPending;
  RejectionVerdict verdict;
  std::vector<double> scores;
  double cost = 0.0;
};

// Scores one graph; must be deterministic in (graph, seed) and safe to call
// concurrently.
using CandidateEvaluator =
    std::function<EvaluationOutcome(const LayerGraph& graph, std::uint64_t seed)>;

struct ProgressRow {
  int attempted = 0;
  int survivors = 0;
  double cost = 0.0;
  std::vector<double> best;       // per anchor, over the window
  std::vector<double> top10_mean; // per anchor, over the top 10 by mean score
  double best_fitness = 0.0;
  double top10_fitness = 0.0;
};

struct SearchLog {
  std::vector<Candidate> candidates;
  std::vector<ProgressRow> progress;  // one row per attempted candidate
  int survivors = 0;
  double cost = 0.0;
  double rejected_cost = 0.0;
};

SearchLog Evolve(const EvolutionConfig& config, const CandidateEvaluator& evaluate,
                 int num_anchors);
SearchLog RandomSearch(const EvolutionConfig& config,
                       const CandidateEvaluator& evaluate, int num_anchors);

// Evaluated candidates ordered by mean score, best first (stable on ties),
// limited to `k`.
std::vector<const Candidate*> TopCandidates(const SearchLog& log, int k);
// Mean over the top-10 evaluated candidates of their mean score; 0 when
// none survived.
double Top10MeanFitness(const SearchLog& log);

}  // namespace evonorm

#endif  // EVONORM_CORE_EVOLUTION_HPP_
