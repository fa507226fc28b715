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

#include "hvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace evonorm {

double DefaultHvpStep(std::span<const double> theta) {
  double inf_norm = 0.0;
  for (double t : theta) inf_norm = std::max(inf_norm, std::abs(t));
  return std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + inf_norm);
}

std::vector<double> HessianVectorProduct(const GradientFn& fn,
                                         std::span<const double> theta,
                                         std::span<const double> v,
                                         std::optional<double> step,
                                         std::span<const double> grad_at_theta) {
  if (v.size() != theta.size()) {
    Fail(ErrorCode::kShapeMismatch, "HessianVectorProduct: |v| != |theta|");
  }
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "HessianVectorProduct: zero direction vector");
  }
  const double h = step.value_or(DefaultHvpStep(theta));

  std::vector<double> base;
  if (grad_at_theta.size() == theta.size()) {
    base.assign(grad_at_theta.begin(), grad_at_theta.end());
  } else {
    base.resize(theta.size());
    fn(theta, base);
  }
  std::vector<double> shifted(theta.begin(), theta.end());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += h * v[i] / norm;
  std::vector<double> grad(theta.size());
  fn(shifted, grad);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = (grad[i] - base[i]) / h * norm;
  }
  return grad;
}

}  // namespace evonorm
