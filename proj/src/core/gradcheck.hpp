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


// Central finite-difference checks of the reverse-mode gradients, over every
// primitive and every zoo layer.

#ifndef EVONORM_CORE_GRADCHECK_HPP_
#define EVONORM_CORE_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "graph.hpp"

namespace evonorm {

struct GradcheckOptions {
  double step = 1e-6;
  double tolerance = 1e-6;
  // Inputs are resampled until every kink and divisor is at least this far
  // from the recorded values.
  double min_margin = 1e-3;
  int max_attempts = 50;
  Shape shape{2, 3, 3, 4};
  int groups = 2;
  std::uint64_t seed = 0;
};

struct GradcheckResult {
  std::string name;
  // |g_ad - g_fd| / max(|g_ad|, |g_fd|) over all inputs jointly.
  double relative_error = 0.0;
  double kink_margin = 0.0;
  int attempts = 0;
  bool passed = false;
};

using GradcheckSampler = std::function<std::vector<Tensor>(std::mt19937_64&)>;
using GradcheckBuilder = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;

// Differentiates sum(w * f(inputs)) for random constant weights w.
GradcheckResult CheckGradient(const std::string& name, const GradcheckSampler& sample,
                              const GradcheckBuilder& build,
                              const GradcheckOptions& options);

// Training-mode layer; gradients w.r.t. x, gamma, beta, v0 and v1.
GradcheckResult CheckLayerGradient(const std::string& name, const LayerGraph& graph,
                                   const GradcheckOptions& options);

// Every primitive (including channel-vector broadcasting) and every zoo
// entry.
std::vector<GradcheckResult> RunGradcheckSuite(const GradcheckOptions& options);

}  // namespace evonorm

#endif  // EVONORM_CORE_GRADCHECK_HPP_
