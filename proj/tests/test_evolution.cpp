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

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <doctest.h>

#include "error.hpp"
#include "evolution.hpp"
#include "searchlog.hpp"

namespace evonorm {
namespace {

// O(n^2) domination check written independently of ParetoFront.
std::vector<int> BruteForceFront(const std::vector<std::vector<double>>& s) {
  std::vector<int> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < s.size() && !dominated; ++j) {
      bool all_ge = true, any_gt = false;
      for (std::size_t k = 0; k < s[i].size(); ++k) {
        all_ge = all_ge && s[j][k] >= s[i][k];
        any_gt = any_gt || s[j][k] > s[i][k];
      }
      dominated = all_ge && any_gt;
    }
    if (!dominated) out.push_back(static_cast<int>(i));
  }
  return out;
}

Candidate Scored(int id, std::vector<double> scores) {
  Candidate c;
  c.id = id;
  c.status = CandidateStatus::kEvaluated;
  c.scores = std::move(scores);
  return c;
}

// Two-objective tournament where A and C are extreme and B has the best
// average; none dominates another.
Population Tournament() {
  Population p(10);
  p.Insert(Scored(0, {0.9, 0.2}));  // A
  p.Insert(Scored(1, {0.7, 0.7}));  // B
  p.Insert(Scored(2, {0.2, 0.9}));  // C
  return p;
}

int Count(const LayerGraph& g, Primitive prim) {
  int n = 0;
  const std::vector<bool> reach = ReachableFromOutput(g);
  for (int i = kNumInitialNodes; i < static_cast<int>(g.nodes.size()); ++i) {
    if (reach[i] && g.nodes[i].op.prim == prim) ++n;
  }
  return n;
}

// Deterministic stand-in for the proxy task: the graph's reachable sigmoid
// and tanh counts are the two scores, and graphs without either are
// rejected.
EvaluationOutcome FakeEvaluate(const LayerGraph& g, std::uint64_t seed) {
  EvaluationOutcome out;
  const int s = Count(g, Primitive::kSigmoid);
  const int t = Count(g, Primitive::kTanh);
  out.cost = 1.0 + static_cast<double>(seed % 3);
  if (s + t == 0) {
    out.status = CandidateStatus::kRejectedQuality;
    return out;
  }
  out.status = CandidateStatus::kEvaluated;
  out.scores = {s / 10.0, t / 10.0};
  return out;
}

EvolutionConfig SmallConfig(std::uint64_t seed) {
  EvolutionConfig c;
  c.budget = 120;
  c.window = 50;
  c.tournament_fraction = 0.2;
  c.seed = seed;
  return c;
}

std::string Dump(const SearchLog& log) {
  std::ostringstream out;
  WriteCandidatesJsonl(out, log);
  WriteProgressCsv(out, log, {AnchorKind::kR, AnchorKind::kM});
  WriteRejectionCsv(out, log);
  return out.str();
}

TEST_CASE("pareto front examples") {
  CHECK(ParetoFront({{1, 0}, {0, 1}, {0.5, 0.5}}) == std::vector<int>{0, 1, 2});
  CHECK(ParetoFront({{1, 1}, {0, 0}}) == std::vector<int>{0});
  // Equal vectors do not dominate each other.
  CHECK(ParetoFront({{0.5, 0.5}, {0.5, 0.5}}) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(ParetoFront({{1, 0}, {1}}), Error);
}

TEST_CASE("pareto front matches brute force on random instances") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_int_distribution<int> dim(1, 4);
  // Coarse values produce plenty of ties.
  std::uniform_int_distribution<int> level(0, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = trial < 50 ? 50 : size(rng);
    const int d = trial < 50 ? 3 : dim(rng);
    std::vector<std::vector<double>> s(n, std::vector<double>(d));
    for (auto& row : s)
      for (double& v : row) v = level(rng) / 5.0;
    CHECK(ParetoFront(s) == BruteForceFront(s));
  }
}

TEST_CASE("average criterion picks the best mean") {
  const Population p = Tournament();
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) CHECK(SelectWinner(p, rng, Criterion::kAverage, 1.0) == 1);
  Population tie(5);
  tie.Insert(Scored(0, {0.1, 0.1}));
  tie.Insert(Scored(1, {0.5, 0.5}));
  tie.Insert(Scored(2, {0.4, 0.6}));
  CHECK(SelectWinner(tie, rng, Criterion::kAverage, 1.0) == 1);
}

TEST_CASE("pareto criterion draws uniformly from the front") {
  const Population p = Tournament();
  std::mt19937_64 rng(43);
  std::array<int, 3> hits{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++hits[SelectWinner(p, rng, Criterion::kPareto, 1.0)];
  for (int h : hits) CHECK(std::abs(h / double(draws) - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("selection edge cases") {
  Population one(3);
  one.Insert(Scored(7, {0.3}));
  std::mt19937_64 rng(44);
  CHECK(SelectWinner(one, rng, Criterion::kPareto, 0.05) == 0);
  CHECK(SelectWinner(one, rng, Criterion::kAverage, 0.05) == 0);
  CHECK_THROWS_AS(SelectWinner(Population(3), rng, Criterion::kPareto, 0.5), Error);
  CHECK_THROWS_AS(SelectWinner(one, rng, Criterion::kPareto, 0.0), Error);
}

TEST_CASE("tournament size is the ceiling of the fraction") {
  // Two of eight entrants: the worst member never wins, every other one can.
  Population p(8);
  for (int i = 0; i < 8; ++i) p.Insert(Scored(i, {i / 10.0}));
  std::mt19937_64 rng(45);
  std::set<int> winners;
  for (int i = 0; i < 2000; ++i) winners.insert(SelectWinner(p, rng, Criterion::kAverage, 0.25));
  CHECK(winners.count(0) == 0);
  CHECK(winners.count(7) == 1);
  CHECK(winners.size() == 7);
}

TEST_CASE("population window evicts oldest first") {
  Population p(3);
  for (int i = 0; i < 5; ++i) p.Insert(Scored(i, {0.0}));
  REQUIRE(p.size() == 3);
  CHECK(p[0].id == 2);
  CHECK(p[2].id == 4);
  CHECK_THROWS_AS(Population(0), Error);
}

TEST_CASE("budget zero yields an empty log") {
  EvolutionConfig c = SmallConfig(1);
  c.budget = 0;
  CHECK(Evolve(c, FakeEvaluate, 2).candidates.empty());
  CHECK(RandomSearch(c, FakeEvaluate, 2).candidates.empty());
}

TEST_CASE("search attempts exactly the budget") {
  for (int budget : {1, 7, 8, 9, 120}) {
    EvolutionConfig c = SmallConfig(2);
    c.budget = budget;
    for (const SearchLog& log : {Evolve(c, FakeEvaluate, 2), RandomSearch(c, FakeEvaluate, 2)}) {
      REQUIRE(static_cast<int>(log.candidates.size()) == budget);
      CHECK(static_cast<int>(log.progress.size()) == budget);
      for (int i = 0; i < budget; ++i) CHECK(log.candidates[i].id == i);
      CHECK(log.progress.back().attempted == budget);
    }
  }
}

TEST_CASE("search logs are deterministic and independent of workers") {
  EvolutionConfig c = SmallConfig(3);
  const std::string once = Dump(Evolve(c, FakeEvaluate, 2));
  CHECK(Dump(Evolve(c, FakeEvaluate, 2)) == once);
  c.workers = 3;
  CHECK(Dump(Evolve(c, FakeEvaluate, 2)) == once);
  c.seed = 4;
  CHECK(Dump(Evolve(c, FakeEvaluate, 2)) != once);
  const std::string random = Dump(RandomSearch(SmallConfig(3), FakeEvaluate, 2));
  CHECK(Dump(RandomSearch(SmallConfig(3), FakeEvaluate, 2)) == random);
}

TEST_CASE("evolution bookkeeping") {
  const EvolutionConfig c = SmallConfig(5);
  const SearchLog log = Evolve(c, FakeEvaluate, 2);
  std::set<int> evaluated;
  double cost = 0.0, rejected = 0.0;
  int survivors = 0;
  for (const Candidate& cand : log.candidates) {
    cost += cand.cost;
    if (cand.status == CandidateStatus::kEvaluated) {
      CHECK(cand.scores.size() == 2);
      evaluated.insert(cand.id);
      ++survivors;
    } else {
      CHECK(cand.scores.empty());
      rejected += cand.cost;
    }
    if (cand.id < c.initial_random) CHECK(cand.origin == Origin::kInitial);
    if (cand.origin == Origin::kMutation) {
      // Parents are earlier survivors, and two mutations touch at most two nodes.
      REQUIRE(cand.parent.has_value());
      CHECK(evaluated.count(*cand.parent) == 1);
      const LayerGraph& parent = log.candidates[*cand.parent].graph;
      int changed = 0;
      for (std::size_t i = 0; i < parent.nodes.size(); ++i) {
        changed += parent.nodes[i] == cand.graph.nodes[i] ? 0 : 1;
      }
      CHECK(changed <= c.mutations_per_offspring);
    } else {
      CHECK_FALSE(cand.parent.has_value());
    }
  }
  CHECK(log.survivors == survivors);
  CHECK(log.cost == doctest::Approx(cost));
  CHECK(log.rejected_cost == doctest::Approx(rejected));
  CHECK(log.progress.back().survivors == survivors);
  int mutations = 0, replacements = 0;
  for (const Candidate& cand : log.candidates) {
    mutations += cand.origin == Origin::kMutation;
    replacements += cand.origin == Origin::kReplacement;
  }
  CHECK(mutations > 20);
  CHECK(replacements > 20);
}

TEST_CASE("random search only draws fresh graphs") {
  const SearchLog log = RandomSearch(SmallConfig(6), FakeEvaluate, 2);
  for (const Candidate& c : log.candidates) {
    CHECK(c.origin == Origin::kRandom);
    CHECK_FALSE(c.parent.has_value());
  }
}

TEST_CASE("batch-independent search never logs (b,w,h) moments") {
  EvolutionConfig c = SmallConfig(7);
  c.generation.batch_independent = true;
  for (const SearchLog& log : {Evolve(c, FakeEvaluate, 2), RandomSearch(c, FakeEvaluate, 2)}) {
    for (const Candidate& cand : log.candidates) {
      for (const GraphNode& n : cand.graph.nodes) {
        CHECK_FALSE((n.kind == GraphNode::Kind::kOp && n.op.is_batch_aggregating()));
      }
    }
  }
}

TEST_CASE("evolution beats random search on a learnable landscape") {
  int wins = 0;
  for (std::uint64_t seed : {11, 12, 13}) {
    EvolutionConfig c = SmallConfig(seed);
    c.budget = 400;
    c.criterion = Criterion::kAverage;
    const double evo = Top10MeanFitness(Evolve(c, FakeEvaluate, 2));
    const double rnd = Top10MeanFitness(RandomSearch(c, FakeEvaluate, 2));
    wins += evo > rnd;
  }
  CHECK(wins == 3);
}

TEST_CASE("evaluator score count is enforced") {
  EvolutionConfig c = SmallConfig(8);
  CHECK_THROWS_AS(Evolve(c, FakeEvaluate, 3), Error);
  CHECK_THROWS_AS(Evolve(c, FakeEvaluate, 0), Error);
  c.tournament_fraction = 1.5;
  CHECK_THROWS_AS(Evolve(c, FakeEvaluate, 2), Error);
}

TEST_CASE("top candidates and top-10 fitness") {
  SearchLog log;
  for (int i = 0; i < 15; ++i) log.candidates.push_back(Scored(i, {i / 20.0, i / 20.0}));
  Candidate rejected;
  rejected.id = 15;
  rejected.status = CandidateStatus::kRejectedStability;
  log.candidates.push_back(rejected);
  const auto top = TopCandidates(log, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0]->id == 14);
  CHECK(top[2]->id == 12);
  // Mean of 14..5 over 20.
  CHECK(Top10MeanFitness(log) == doctest::Approx(9.5 / 20.0));
  CHECK(Top10MeanFitness(SearchLog{}) == 0.0);
}

TEST_CASE("names round trip") {
  for (Criterion c : {Criterion::kPareto, Criterion::kAverage}) {
    CHECK(ParseCriterion(CriterionName(c)) == c);
  }
  for (CandidateStatus s : {CandidateStatus::kPending, CandidateStatus::kRejectedQuality,
                            CandidateStatus::kRejectedStability, CandidateStatus::kEvaluated}) {
    CHECK(ParseStatus(StatusName(s)) == s);
  }
  for (Origin o : {Origin::kInitial, Origin::kMutation, Origin::kReplacement, Origin::kRandom}) {
    CHECK(ParseOrigin(OriginName(o)) == o);
  }
  CHECK_THROWS_AS(ParseCriterion("median"), Error);
}

TEST_CASE("candidate log round trip") {
  const SearchLog log = Evolve(SmallConfig(9), FakeEvaluate, 2);
  const auto dir = std::filesystem::temp_directory_path() / "evonorm_test_jsonl";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "candidates.jsonl").string();
  {
    std::ofstream out(path);
    WriteCandidatesJsonl(out, log);
  }
  const std::vector<Candidate> back = ReadCandidatesJsonl(path);
  REQUIRE(back.size() == log.candidates.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(CandidateToJson(back[i]) == CandidateToJson(log.candidates[i]));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "{not json\n";
  }
  try {
    ReadCandidatesJsonl(path);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find(std::to_string(back.size() + 1)) != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting") {
  CHECK(FormatDouble(0.5) == "0.5");
  CHECK(FormatDouble(0.1) == "0.1");
  CHECK(FormatDouble(std::nan("")) == "nan");
  CHECK(FormatDouble(INFINITY) == "inf");
}

}  // namespace
}  // namespace evonorm
