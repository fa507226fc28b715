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

#include "optim.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace evonorm {

void SgdStep(std::span<Tensor> params, std::span<const Tensor> grads,
             SgdState& state, const SgdConfig& config, double lr) {
  if (params.size() != grads.size()) {
    Fail(ErrorCode::kShapeMismatch, "SgdStep: parameter/gradient count mismatch");
  }
  if (state.velocity.empty()) {
    state.velocity.reserve(params.size());
    for (const Tensor& p : params) state.velocity.emplace_back(p.shape());
  }
  if (state.velocity.size() != params.size()) {
    Fail(ErrorCode::kShapeMismatch, "SgdStep: optimizer state does not match parameters");
  }
  const double m = config.momentum;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].data();
    auto g = grads[k].data();
    auto v = state.velocity[k].data();
    if (g.size() != theta.size() || v.size() != theta.size()) {
      Fail(ErrorCode::kShapeMismatch, "SgdStep: shape mismatch in parameter " +
                                          std::to_string(k));
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g[i] + config.weight_decay * theta[i];
      v[i] = m * v[i] + gi;
      theta[i] -= lr * (config.nesterov ? gi + m * v[i] : v[i]);
    }
  }
}

const char* ScheduleName(Schedule s) {
  return s == Schedule::kConstant ? "constant" : "cosine";
}

Schedule ParseSchedule(const std::string& name) {
  if (name == "constant") return Schedule::kConstant;
  if (name == "cosine") return Schedule::kCosine;
  Fail(ErrorCode::kConfig, "unknown schedule '" + name + "' (constant|cosine)");
}

double LearningRateAt(Schedule schedule, double base, int step, int total,
                      int warmup) {
  if (step < 0 || step > total) {
    Fail(ErrorCode::kInvalidArgument, "LearningRateAt: step outside [0, total]");
  }
  if (warmup > 0 && step < warmup) {
    return base * static_cast<double>(step) / warmup;
  }
  if (schedule == Schedule::kConstant) return base;
  const int span = total - warmup;
  const double progress =
      span > 0 ? static_cast<double>(step - warmup) / span : 1.0;
  return 0.5 * base * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace evonorm
