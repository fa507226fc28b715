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


#include "rejection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "hvp.hpp"

namespace evonorm {

namespace {

constexpr std::uint64_t kQualityTag = 11;
constexpr std::uint64_t kStabilityTag = 12;

double Norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

QualityResult QualityTest(const LayerGraph& graph, const AnchorSpec& anchor,
                          const Split& train, const Split& validation,
                          const QualityConfig& config, std::uint64_t seed) {
  if (!(config.accuracy_threshold > 0.0 && config.accuracy_threshold < 1.0)) {
    Fail(ErrorCode::kConfig, "quality accuracy_threshold must lie in (0, 1)");
  }
  TrainConfig train_config = config.train;
  train_config.schedule = Schedule::kConstant;
  const TrainReport report = TrainEval(anchor, graph, train, validation,
                                       train_config, DeriveSeed(seed, kQualityTag));
  QualityResult result;
  result.accuracy = report.accuracy;
  result.non_finite = report.non_finite;
  result.passed = !report.non_finite && report.accuracy >= config.accuracy_threshold;
  return result;
}

ProbeBatch MakeProbeBatch(const Split& train, int size) {
  size = std::min(size, train.size());
  if (size < 1) Fail(ErrorCode::kConfig, "probe batch must hold at least one row");
  std::vector<int> rows(size);
  std::iota(rows.begin(), rows.end(), 0);
  return {GatherImages(train, rows), GatherLabels(train, rows)};
}

StabilityResult StabilityTest(const LayerGraph& graph, const AnchorSpec& anchor,
                              const ProbeBatch& probe,
                              const StabilityConfig& config, std::uint64_t seed,
                              double ema_momentum) {
  if (config.max_ascent_steps < 1) {
    Fail(ErrorCode::kConfig, "stability max_ascent_steps must be >= 1");
  }
  if (!(config.norm_threshold > 0.0)) {
    Fail(ErrorCode::kConfig, "stability norm_threshold must be positive");
  }
  AnchorModel model(anchor, graph, DeriveSeed(seed, kStabilityTag), ema_momentum);
  std::vector<Tensor> grads;
  const GradientFn loss_and_grad = [&](std::span<const double> theta,
                                       std::span<double> out) {
    model.SetFlatParameters(theta);
    const double loss = model.LossAndGradients(probe.images, probe.labels, grads);
    std::size_t offset = 0;
    for (const Tensor& g : grads) {
      std::copy(g.data().begin(), g.data().end(), out.begin() + offset);
      offset += g.size();
    }
    return loss;
  };

  StabilityResult result;
  std::vector<double> theta = model.FlatParameters();
  std::vector<double> grad(theta.size());
  const double inf = std::numeric_limits<double>::infinity();
  for (int step = 0; step < config.max_ascent_steps; ++step) {
    const double loss = loss_and_grad(theta, grad);
    double norm = Norm2(grad);
    if (!std::isfinite(norm) || !std::isfinite(loss)) norm = inf;
    result.grad_norms.push_back(norm);
    result.losses.push_back(loss);
    result.peak_grad_norm = std::max(result.peak_grad_norm, norm);
    if (norm > config.norm_threshold || !std::isfinite(norm)) {
      result.steps_to_blowup = step;
      return result;
    }
    if (norm == 0.0) break;
    std::vector<double> d =
        HessianVectorProduct(loss_and_grad, theta, grad, config.hvp_step, grad);
    for (double& v : d) v /= norm;
    if (!AllFinite(d)) {
      result.steps_to_blowup = step;
      return result;
    }
    double d_inf = 0.0;
    for (double v : d) d_inf = std::max(d_inf, std::abs(v));
    if (d_inf == 0.0) break;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] += config.step_size * d[i] / d_inf;
    }
  }
  result.passed = true;
  return result;
}

RejectionVerdict RunRejection(const LayerGraph& graph, const AnchorSpec& anchor,
                              const Split& train, const Split& validation,
                              const ProbeBatch& probe,
                              const QualityConfig& quality,
                              const StabilityConfig& stability,
                              std::uint64_t seed) {
  RejectionVerdict verdict;
  const QualityResult q = QualityTest(graph, anchor, train, validation, quality, seed);
  verdict.quality_passed = q.passed;
  verdict.quality_accuracy = q.accuracy;
  if (!q.passed) return verdict;
  verdict.stability_run = true;
  const StabilityResult s = StabilityTest(graph, anchor, probe, stability, seed,
                                          quality.train.ema_momentum);
  verdict.stability_passed = s.passed;
  verdict.peak_grad_norm = s.peak_grad_norm;
  verdict.steps_to_blowup = s.steps_to_blowup;
  verdict.passed = s.passed;
  return verdict;
}

}  // namespace evonorm
