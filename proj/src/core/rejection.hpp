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


// Cheap filters run before full training: a short-training quality test and
// a gradient-norm stability test that ascends the norm adversarially.

#ifndef EVONORM_CORE_REJECTION_HPP_
#define EVONORM_CORE_REJECTION_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "anchor.hpp"
#include "dataset.hpp"
#include "graph.hpp"
#include "train.hpp"

namespace evonorm {

struct QualityConfig {
  // steps, batch and learning rate of the short run; the schedule is
  // constant and accuracy is measured on the validation split.
  TrainConfig train = [] {
    TrainConfig t;
    t.steps = 100;
    return t;
  }();
  double accuracy_threshold = 0.2;  // twice chance on 10 classes
};

struct QualityResult {
  bool passed = false;
  double accuracy = 0.0;
  bool non_finite = false;
};

QualityResult QualityTest(const LayerGraph& graph, const AnchorSpec& anchor,
                          const Split& train, const Split& validation,
                          const QualityConfig& config, std::uint64_t seed);

struct StabilityConfig {
  int max_ascent_steps = 100;
  double norm_threshold = 1e8;
  double step_size = 0.1;
  int probe_batch = 32;
  // Finite-difference step of the Hessian-vector product; unset uses
  // DefaultHvpStep.
  std::optional<double> hvp_step;
};

struct StabilityResult {
  bool passed = false;
  double peak_grad_norm = 0.0;
  std::optional<int> steps_to_blowup;
  // Gradient norm and loss at each visited point; non-finite norms are
  // recorded as +inf.
  std::vector<double> grad_norms;
  std::vector<double> losses;
};

// The first `size` rows of `train`, reused across candidates.
struct ProbeBatch {
  Tensor images;
  std::vector<int> labels;
};
ProbeBatch MakeProbeBatch(const Split& train, int size);

// From a fresh initialization, repeats: g = grad loss; fail if |g| exceeds
// the threshold or anything is non-finite; d = H g / |g| (the gradient of
// |g|); theta += step_size * d / |d|_inf. Passes when the loop completes.
StabilityResult StabilityTest(const LayerGraph& graph, const AnchorSpec& anchor,
                              const ProbeBatch& probe,
                              const StabilityConfig& config, std::uint64_t seed,
                              double ema_momentum = kDefaultEmaMomentum);

struct RejectionVerdict {
  bool passed = false;
  bool quality_passed = false;
  bool stability_run = false;
  bool stability_passed = false;
  double quality_accuracy = 0.0;
  double peak_grad_norm = 0.0;
  std::optional<int> steps_to_blowup;
};

// Quality first; the stability test only runs for quality survivors.
RejectionVerdict RunRejection(const LayerGraph& graph, const AnchorSpec& anchor,
                              const Split& train, const Split& validation,
                              const ProbeBatch& probe,
                              const QualityConfig& quality,
                              const StabilityConfig& stability,
                              std::uint64_t seed);

}  // namespace evonorm

#endif  // EVONORM_CORE_REJECTION_HPP_
