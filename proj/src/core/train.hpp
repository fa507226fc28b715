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


// Trains an anchor hosting a candidate layer and scores it on held-out data.

#ifndef EVONORM_CORE_TRAIN_HPP_
#define EVONORM_CORE_TRAIN_HPP_

#include <cstdint>
#include <vector>

#include "anchor.hpp"
#include "dataset.hpp"
#include "graph.hpp"
#include "optim.hpp"

namespace evonorm {

struct TrainConfig {
  int steps = 1000;
  int batch = 128;
  double lr = 0.1;
  Schedule schedule = Schedule::kConstant;
  int warmup = 0;
  SgdConfig sgd;
  double ema_momentum = kDefaultEmaMomentum;
  int eval_batch = 256;
};

struct TrainReport {
  double accuracy = 0.0;
  std::vector<double> loss_trace;
  int steps = 0;  // steps completed
  bool non_finite = false;
};

// Fraction of `split` classified correctly with inference-mode forwards.
// Rows whose logits are not all finite count as wrong.
double Accuracy(AnchorModel& model, const Split& split, int eval_batch);

// Fresh model from `seed`, `config.steps` SGD steps on shuffled minibatches
// of `train`, then accuracy on `eval`. A non-finite loss or parameter stops
// training with accuracy 0.
TrainReport TrainEval(const AnchorSpec& spec, const LayerGraph& layer,
                      const Split& train, const Split& eval,
                      const TrainConfig& config, std::uint64_t seed);

// A 64-bit seed derived from (seed, tag, index) via std::seed_seq.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t tag,
                         std::uint64_t index = 0);

}  // namespace evonorm

#endif  // EVONORM_CORE_TRAIN_HPP_
