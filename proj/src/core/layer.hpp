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


// Evaluating a LayerGraph on a feature map. V0/V1, gamma and beta are
// per-channel vectors that broadcast against x; (b,w,h) moments switch to
// moving averages in inference mode.

#ifndef EVONORM_CORE_LAYER_HPP_
#define EVONORM_CORE_LAYER_HPP_

#include <map>
#include <vector>

#include "autodiff.hpp"
#include "graph.hpp"
#include "tensor.hpp"

namespace evonorm {

inline constexpr double kDefaultEmaMomentum = 0.99;

struct LayerParams {
  Tensor gamma;
  Tensor beta;
  Tensor v0;
  Tensor v1;

  // gamma = 1, beta = 0, v0 = 0, v1 = 1.
  static LayerParams Default(int channels);
  int channels() const { return gamma.channels(); }
};

enum class EvalMode { kTraining, kInference };

// Moving averages of every (b,w,h) moment node, one value per channel.
// Means start at 0, rms/std at 1.
struct EmaStore {
  double momentum = kDefaultEmaMomentum;
  std::map<int, std::vector<double>> stats;

  static EmaStore ForGraph(const LayerGraph& graph, int channels,
                           double momentum = kDefaultEmaMomentum);
};

struct LayerVars {
  ad::Var gamma;
  ad::Var beta;
  ad::Var v0;
  ad::Var v1;
};

// Records the layer on `tape`. Only nodes feeding the output are evaluated.
// Training mode updates `ema` for each evaluated (b,w,h) node; missing
// entries are created with their initial values first.
ad::Var ForwardOnTape(ad::Tape& tape, const LayerGraph& graph, ad::Var x,
                      const LayerVars& params, EmaStore& ema, EvalMode mode);

Tensor Forward(const LayerGraph& graph, const Tensor& x,
               const LayerParams& params, EmaStore& ema, EvalMode mode);

}  // namespace evonorm

#endif  // EVONORM_CORE_LAYER_HPP_
