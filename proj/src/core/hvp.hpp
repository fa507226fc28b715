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

// Hessian-vector products by differencing two first-order gradients.

#ifndef EVONORM_CORE_HVP_HPP_
#define EVONORM_CORE_HVP_HPP_

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace evonorm {

// Evaluates the loss at theta and writes d(loss)/d(theta) into grad.
using GradientFn =
    std::function<double(std::span<const double> theta, std::span<double> grad)>;

// sqrt(machine epsilon) * (1 + |theta|_inf).
double DefaultHvpStep(std::span<const double> theta);

// (grad(theta + h*v/|v|) - grad(theta)) / h * |v|.
// `grad_at_theta` skips re-evaluating the base gradient when given.
std::vector<double> HessianVectorProduct(
    const GradientFn& fn, std::span<const double> theta,
    std::span<const double> v, std::optional<double> step = std::nullopt,
    std::span<const double> grad_at_theta = {});

}  // namespace evonorm

#endif  // EVONORM_CORE_HVP_HPP_
