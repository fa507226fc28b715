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

// Proxy-task optimizer: SGD with (Nesterov) momentum and L2 weight decay,
// plus the learning-rate schedules.

#ifndef EVONORM_CORE_OPTIM_HPP_
#define EVONORM_CORE_OPTIM_HPP_

#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace evonorm {

struct SgdConfig {
  double momentum = 0.9;
  double weight_decay = 1e-4;
  bool nesterov = true;
};

struct SgdState {
  // Mirrors the parameter shapes; empty until the first step.
  std::vector<Tensor> velocity;
};

// g' = g + wd*theta; v' = m*v + g';
// theta' = theta - lr * (g' + m*v')   (Nesterov)
// theta' = theta - lr * v'            (classical)
void SgdStep(std::span<Tensor> params, std::span<const Tensor> grads,
             SgdState& state, const SgdConfig& config, double lr);

enum class Schedule { kConstant, kCosine };

const char* ScheduleName(Schedule s);
Schedule ParseSchedule(const std::string& name);

// Linear warmup from 0 to `base` over `warmup` steps, then constant or a
// half-cosine decay to 0 at `total`.
double LearningRateAt(Schedule schedule, double base, int step, int total,
                      int warmup);

}  // namespace evonorm

#endif  // EVONORM_CORE_OPTIM_HPP_
