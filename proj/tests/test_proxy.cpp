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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <doctest.h>
#include <json.hpp>

#include "anchor.hpp"
#include "config.hpp"
#include "error.hpp"
#include "proxy.hpp"
#include "zoo.hpp"

namespace evonorm {
namespace {

const Dataset& MicroData() {
  static const Dataset data = LoadDataset(Preset("micro"));
  return data;
}

LayerGraph Identity() {
  LayerGraph g = LayerGraph::Empty();
  g.AddOp(Primitive::kAdd, {kNodeX, kNodeZero});
  return g;
}

TEST_CASE("synthetic data is deterministic and balanced") {
  SyntheticConfig c;
  c.image_size = 8;
  const Split a = MakeSyntheticSplit(c, 40, 5);
  const Split b = MakeSyntheticSplit(c, 40, 5);
  CHECK(a.images == b.images);
  CHECK(a.labels == b.labels);
  CHECK(a.images.shape() == (Shape{40, 8, 8, 3}));
  for (int i = 0; i < 40; ++i) CHECK(a.labels[i] == i % kNumClasses);
  CHECK_FALSE(MakeSyntheticSplit(c, 40, 6).images == a.images);
}

TEST_CASE("noiseless images are identical within a class") {
  SyntheticConfig c;
  c.image_size = 6;
  c.noise = 0.0;
  const Split s = MakeSyntheticSplit(c, 30, 1);
  const std::size_t row = s.images.size() / 30;
  for (int i = 10; i < 30; ++i) {
    for (std::size_t k = 0; k < row; ++k) CHECK(s.images[i * row + k] == s.images[(i % 10) * row + k]);
  }
  // Distinct classes differ.
  double diff = 0.0;
  for (std::size_t k = 0; k < row; ++k) diff += std::abs(s.images[k] - s.images[row + k]);
  CHECK(diff > 1.0);
}

// Softmax regression on raw pixels by full-batch gradient descent.
double LinearProbeAccuracy(const Split& train, const Split& val) {
  const int d = static_cast<int>(train.images.size() / train.size());
  auto flat = [d](const Split& s) {
    return Tensor(Shape{s.size(), 1, 1, d},
                  std::vector<double>(s.images.data().begin(), s.images.data().end()));
  };
  const Tensor xt = flat(train), xv = flat(val);
  Tensor w(Shape{1, 1, d, kNumClasses}), b(Shape{1, 1, 1, kNumClasses});
  for (int it = 0; it < 150; ++it) {
    const Tensor g = SoftmaxCrossEntropyGrad(Dense(xt, w, b), train.labels);
    for (int i = 0; i < train.size(); ++i)
      for (int k = 0; k < kNumClasses; ++k) {
        const double gk = g.at(i, 0, 0, k);
        b[k] -= 0.5 * gk;
        for (int j = 0; j < d; ++j) w.at(0, 0, j, k) -= 0.5 * gk * xt.at(i, 0, 0, j) / d;
      }
  }
  const Tensor logits = Dense(xv, w, b);
  int correct = 0;
  for (int i = 0; i < val.size(); ++i) {
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k) {
      if (logits.at(i, 0, 0, k) > logits.at(i, 0, 0, best)) best = k;
    }
    correct += best == val.labels[i];
  }
  return static_cast<double>(correct) / val.size();
}

TEST_CASE("classes are linearly separable") {
  const Dataset desk = LoadDataset(Preset("desk"));
  CHECK(LinearProbeAccuracy(Slice(desk.train(), 0, 1024), desk.validation()) >= 0.5);
  CHECK(LinearProbeAccuracy(MicroData().train(), MicroData().validation()) >= 0.5);
}

TEST_CASE("split helpers") {
  const Split& t = MicroData().train();
  const auto [head, tail] = Partition(t, 0.9);
  CHECK(head.size() + tail.size() == t.size());
  CHECK(head.size() == static_cast<int>(std::lround(0.9 * t.size())));
  CHECK(tail.labels.front() == t.labels[head.size()]);
  const Split s = Slice(t, 3, 7);
  CHECK(s.size() == 4);
  CHECK(s.images.at(0, 1, 1, 2) == t.images.at(3, 1, 1, 2));
  const std::vector<int> rows{5, 2};
  CHECK(GatherLabels(t, rows) == std::vector<int>{t.labels[5], t.labels[2]});
  CHECK(GatherImages(t, rows).at(1, 0, 0, 0) == t.images.at(2, 0, 0, 0));
}

TEST_CASE("dataset read counters") {
  const Dataset d(MakeSyntheticSplit(SyntheticConfig{}, 10, 1),
                  MakeSyntheticSplit(SyntheticConfig{}, 10, 2));
  d.train();
  d.train();
  d.validation();
  CHECK(d.train_reads() == 2);
  CHECK(d.validation_reads() == 1);
}

TEST_CASE("cifar reader") {
  const auto dir = std::filesystem::temp_directory_path() / "evonorm_cifar_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "batch.bin").string();
  {
    std::ofstream out(path, std::ios::binary);
    for (int r = 0; r < 2; ++r) {
      out.put(static_cast<char>(r == 0 ? 7 : 2));
      for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 1024; ++i) out.put(static_cast<char>((c * 50 + i + r) % 256));
    }
  }
  const Split s = ReadCifar10File(path);
  REQUIRE(s.size() == 2);
  CHECK(s.labels == std::vector<int>{7, 2});
  CHECK(s.images.shape() == (Shape{2, 32, 32, 3}));
  // Pixel i of channel c sits at row i / 32, column i % 32, and the
  // per-channel standardization is affine in the raw byte.
  auto ratio = [&](int n, int c, int i2, int i1) {
    auto at = [&](int i) { return s.images.at(n, i / 32, i % 32, c); };
    return (at(i2) - at(0)) / (at(i1) - at(0));
  };
  CHECK(ratio(0, 2, 35, 10) == doctest::Approx(35.0 / 10.0));
  CHECK(ratio(1, 1, 32, 5) == doctest::Approx(32.0 / 5.0));
  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out.put('x');
  }
  CHECK_THROWS_AS(ReadCifar10File(path), Error);
  CHECK_THROWS_AS(LoadCifar10((dir / "missing").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("anchor parameter counts match the shape-walker reference") {
  std::ifstream in(std::string(EVONORM_TEST_DATA_DIR) + "/anchor_params.json");
  REQUIRE(in.good());
  const nlohmann::json ref = nlohmann::json::parse(in);
  for (const auto& [mult, anchors] : ref.items()) {
    for (const auto& [name, entry] : anchors.items()) {
      CAPTURE(mult);
      CAPTURE(name);
      const AnchorSpec spec = MakeAnchorSpec(ParseAnchor(name), std::stod(mult));
      const AnchorModel model(spec, Zoo("bn_relu").graph, 1);
      CHECK(model.parameter_count() == entry["parameters"].get<std::size_t>());
      CHECK(LayerSiteChannels(spec) == entry["layer_sites"].get<std::vector<int>>());
      CHECK(model.num_layer_sites() == static_cast<int>(entry["layer_sites"].size()));
    }
  }
}

TEST_CASE("anchors produce logits and train with an identity layer") {
  const Split& t = MicroData().train();
  const std::vector<int> rows{0, 1, 2, 3, 4};
  const Tensor images = GatherImages(t, rows);
  for (AnchorKind k : {AnchorKind::kR, AnchorKind::kM, AnchorKind::kE}) {
    AnchorModel model(MakeAnchorSpec(k, 0.5), Zoo("evonorm_s0", 4).graph, 2);
    const Tensor logits = model.PredictLogits(images);
    CHECK(logits.shape() == (Shape{5, 1, 1, 10}));
    CHECK(logits.AllFinite());
  }
  TrainConfig tc;
  tc.steps = 20;
  tc.batch = 16;
  tc.lr = 0.05;
  const TrainReport r = TrainEval(MakeAnchorSpec(AnchorKind::kR, 0.5), Identity(), t,
                                  MicroData().validation(), tc, 3);
  CHECK(r.steps == 20);
  CHECK_FALSE(r.non_finite);
  CHECK(r.loss_trace.size() == 20);
}

TEST_CASE("anchor names and group divisibility") {
  CHECK(ParseAnchor("r") == AnchorKind::kR);
  CHECK(ParseAnchor("anchor_m") == AnchorKind::kM);
  CHECK(ParseAnchor("E") == AnchorKind::kE);
  CHECK_THROWS_AS(ParseAnchor("Q"), Error);
  try {
    AnchorModel model(MakeAnchorSpec(AnchorKind::kR, 0.5), Zoo("evonorm_s0", 8).graph, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGroupDivisibility);
  }
  ProxyConfig p;
  p.width_multiplier = 0.5;
  p.groups = 8;
  CHECK_THROWS_AS(CheckProxyConfig(p), Error);
  p.groups = 4;
  CHECK_NOTHROW(CheckProxyConfig(p));
  p.anchors.clear();
  CHECK_THROWS_AS(CheckProxyConfig(p), Error);
}

TEST_CASE("parameter flattening round trips") {
  AnchorModel model(MakeAnchorSpec(AnchorKind::kM, 0.5), Zoo("evonorm_b0").graph, 4);
  std::vector<double> flat = model.FlatParameters();
  CHECK(flat.size() == model.parameter_count());
  for (double& v : flat) v += 1.0;
  model.SetFlatParameters(flat);
  CHECK(model.FlatParameters() == flat);
}

TEST_CASE("model gradients match finite differences") {
  const Split& t = MicroData().train();
  const std::vector<int> rows{0, 1, 2, 3, 4, 5};
  const Tensor images = GatherImages(t, rows);
  const std::vector<int> labels = GatherLabels(t, rows);
  for (AnchorKind k : {AnchorKind::kR, AnchorKind::kM, AnchorKind::kE}) {
    CAPTURE(AnchorName(k));
    AnchorModel model(MakeAnchorSpec(k, 0.5), Zoo("evonorm_s0", 4).graph, 5);
    std::vector<Tensor> grads;
    model.LossAndGradients(images, labels, grads);
    std::vector<double> g;
    for (const Tensor& t2 : grads) g.insert(g.end(), t2.data().begin(), t2.data().end());
    const std::vector<double> theta = model.FlatParameters();
    REQUIRE(g.size() == theta.size());
    const double h = 1e-5;
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < theta.size(); i += 37) {
      std::vector<double> p = theta, m = theta;
      p[i] += h;
      m[i] -= h;
      std::vector<Tensor> scratch;
      model.SetFlatParameters(p);
      const double lp = model.LossAndGradients(images, labels, scratch);
      model.SetFlatParameters(m);
      const double lm = model.LossAndGradients(images, labels, scratch);
      const double fd = (lp - lm) / (2 * h);
      err = std::max(err, std::abs(fd - g[i]));
      scale = std::max(scale, std::abs(g[i]));
    }
    model.SetFlatParameters(theta);
    CHECK(err <= 1e-6 * std::max(1.0, scale));
  }
}

TEST_CASE("training is deterministic and untrained models sit at chance") {
  const Dataset& d = MicroData();
  TrainConfig tc = EffectiveProxy(Preset("micro")).train;
  tc.steps = 30;
  const AnchorSpec r = MakeAnchorSpec(AnchorKind::kR, 0.5);
  const TrainReport a = TrainEval(r, Zoo("bn_relu", 4).graph, d.train(), d.validation(), tc, 9);
  const TrainReport b = TrainEval(r, Zoo("bn_relu", 4).graph, d.train(), d.validation(), tc, 9);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.loss_trace == b.loss_trace);
  tc.steps = 0;
  double sum = 0.0;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    sum += TrainEval(r, Zoo("bn_relu", 4).graph, d.train(), d.validation(), tc, seed).accuracy;
  }
  CHECK(std::abs(sum / 5 - 0.1) <= 0.05);
}

TEST_CASE("non-finite training stops with zero accuracy") {
  LayerGraph g = LayerGraph::Empty();
  g.AddOp(Primitive::kExp, {kNodeX});
  g.AddOp(Primitive::kExp, {g.output()});
  TrainConfig tc = EffectiveProxy(Preset("micro")).train;
  tc.lr = 1e6;
  const TrainReport r = TrainEval(MakeAnchorSpec(AnchorKind::kR, 0.5), g, MicroData().train(),
                                  MicroData().validation(), tc, 1);
  CHECK(r.non_finite);
  CHECK(r.accuracy == 0.0);
  CHECK(r.steps < tc.steps);
}

TEST_CASE("seed derivation") {
  CHECK(DeriveSeed(1, 2, 3) == DeriveSeed(1, 2, 3));
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(1, 2, 4));
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(1, 3, 3));
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(2, 2, 3));
}

TEST_CASE("proxy evaluator outcomes and cost") {
  const ProxyConfig p = EffectiveProxy(Preset("micro"));
  const ProxyEvaluator eval(p, MicroData());
  const EvaluationOutcome rnd = eval(Zoo("random_table3").graph, 1);
  CHECK(rnd.status == CandidateStatus::kRejectedQuality);
  CHECK(rnd.scores.empty());
  CHECK(rnd.cost == p.quality.train.steps);

  const EvaluationOutcome bn = eval(Zoo("bn_relu", 4).graph, 1);
  REQUIRE(bn.status == CandidateStatus::kEvaluated);
  CHECK(bn.scores.size() == 3);
  CHECK(bn.verdict.passed);
  // quality steps + two gradients per ascent step + full training per anchor
  CHECK(bn.cost == p.quality.train.steps + 2.0 * p.stability.max_ascent_steps +
                       3.0 * p.train.steps);
  CHECK(eval.Scores(Zoo("bn_relu", 4).graph, 1) == bn.scores);
}

TEST_CASE("proxy evaluator without rejection trains every anchor") {
  ProxyConfig p = EffectiveProxy(Preset("micro"));
  p.rejection = false;
  p.train.steps = 10;
  const ProxyEvaluator eval(p, MicroData());
  const EvaluationOutcome out = eval(Zoo("random_table3").graph, 2);
  CHECK(out.status == CandidateStatus::kEvaluated);
  CHECK(out.scores.size() == 3);
  CHECK(out.cost == 30.0);
}

TEST_CASE("histogram bins") {
  const auto bins = AccuracyHistogram({0.0, 0.04, 0.05, 0.5, 1.0, 0.999}, 20);
  REQUIRE(bins.size() == 20);
  CHECK(bins[0].count == 2);
  CHECK(bins[1].count == 1);
  CHECK(bins[10].count == 1);
  CHECK(bins[19].count == 2);
  CHECK(bins[19].hi == 1.0);
  CHECK_THROWS_AS(AccuracyHistogram({0.5}, 0), Error);
}

TEST_CASE("rerank keeps input order on ties and never reads validation") {
  const Dataset& d = MicroData();
  ProxyConfig p = EffectiveProxy(Preset("micro"));
  // A zero layer before pooling makes the logits constant, so every model
  // predicts one class and scores exactly 0.1 on 100 held-out rows.
  p.anchors = {AnchorKind::kR};
  p.train.steps = 0;
  RerankConfig rc;
  rc.width_multiplier = 1.0;
  rc.train_fraction = 924.0 / 1024.0;
  LayerGraph zero = LayerGraph::Empty();
  zero.AddOp(Primitive::kNeg, {kNodeZero});
  const std::vector<RerankInput> in{{5, zero}, {6, zero}, {7, zero}};
  const long before = d.validation_reads();
  const auto out = Rerank(in, p, rc, d, 1, 1);
  CHECK(d.validation_reads() == before);
  REQUIRE(out.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(out[i].mean == doctest::Approx(0.1));
    CHECK(out[i].id == 5 + i);
    CHECK(out[i].input_position == i);
  }
  const auto single = Rerank({in[2]}, p, rc, d, 1, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].id == 7);
  rc.top_k = 2;
  CHECK(Rerank(in, p, rc, d, 1, 1).size() == 2);
}

TEST_CASE("rerank ranks bn_relu above the random layer") {
  const Dataset& d = MicroData();
  const ProxyConfig p = EffectiveProxy(Preset("micro"));
  RerankConfig rc = Preset("micro").rerank;
  rc.step_factor = 1.0;
  rc.width_multiplier = 1.0;
  const auto out = Rerank({{0, Zoo("random_table3", 4).graph}, {1, Zoo("bn_relu", 4).graph}},
                          p, rc, d, 4, 1);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == 1);
  CHECK(out[0].input_position == 1);
  CHECK(out[0].mean > out[1].mean);
}

TEST_CASE("survey trains every graph on every anchor") {
  ProxyConfig p = EffectiveProxy(Preset("micro"));
  p.train.steps = 5;
  GenerationOptions gen;
  gen.groups = 4;
  const SurveyResult a = Survey(3, p, gen, MicroData(), 8, 1);
  const SurveyResult b = Survey(3, p, gen, MicroData(), 8, 2);
  REQUIRE(a.graphs.size() == 3);
  REQUIRE(a.accuracies.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.graphs[i] == b.graphs[i]);
    CHECK(a.accuracies[i] == b.accuracies[i]);
    CHECK(a.accuracies[i].size() == 3);
  }
}

TEST_SUITE("slow") {
TEST_CASE("bn_relu trains well on the desk proxy") {
  const RunConfig desk = Preset("desk");
  const Dataset d = LoadDataset(desk);
  TrainConfig tc = EffectiveProxy(desk).train;
  REQUIRE(tc.steps == 1000);
  const TrainReport r = TrainEval(MakeAnchorSpec(AnchorKind::kR), Zoo("bn_relu").graph, d.train(),
                                  d.validation(), tc, 0);
  CHECK(r.accuracy >= 0.7);
}
}

}  // namespace
}  // namespace evonorm
