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

// Tensor-level reverse-mode differentiation. A Tape records every value in
// creation order; since inputs always precede outputs, walking the tape
// backwards from the loss is a reverse topological sweep.

#ifndef EVONORM_CORE_AUTODIFF_HPP_
#define EVONORM_CORE_AUTODIFF_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace evonorm::ad {

struct Var {
  std::uint32_t index = 0;
};

class Tape;

// Called once during the backward sweep with the node's accumulated
// gradient; pushes contributions into its inputs via Tape::Accumulate.
using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that receives a gradient.
  Var Variable(Tensor value);
  // Leaf that never receives a gradient.
  Var Constant(Tensor value);
  // Interior node. `fn` is dropped when no input requires a gradient.
  Var Record(Tensor value, std::span<const Var> inputs, BackwardFn fn,
             double kink_margin = std::numeric_limits<double>::infinity());

  const Tensor& value(Var v) const { return nodes_[v.index].value; }
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }
  // Zeros shaped like the value when the node was not reached.
  Tensor grad(Var v) const;

  void Accumulate(Var v, const Tensor& g);
  void Accumulate(Var v, Tensor&& g);

  // Seeds d(loss)/d(loss) = 1 and sweeps. May be called once per tape.
  void Backward(Var loss);

  // Smallest distance to a non-differentiable point (Max ties, zero
  // arguments of Abs/Sqrt/Log, zero divisors) seen among recorded values.
  double min_kink_margin() const { return min_kink_margin_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  double min_kink_margin_ = std::numeric_limits<double>::infinity();
  bool swept_ = false;
};

Var Unary(Tape& tape, Primitive kind, Var x);
// Broadcasts (1,1,1,c) channel vectors on either side.
Var Binary(Tape& tape, Primitive kind, Var x, Var y);
Var Moment(Tape& tape, Primitive kind, IndexSet index, Var x);
// Dispatches on arity / moment-ness.
Var Apply(Tape& tape, Primitive kind, IndexSet index, std::span<const Var> inputs);

inline Var Add(Tape& t, Var a, Var b) { return Binary(t, Primitive::kAdd, a, b); }
inline Var Mul(Tape& t, Var a, Var b) { return Binary(t, Primitive::kMul, a, b); }
inline Var Div(Tape& t, Var a, Var b) { return Binary(t, Primitive::kDiv, a, b); }
inline Var Max(Tape& t, Var a, Var b) { return Binary(t, Primitive::kMax, a, b); }

// Channel vector (1,1,1,c) repeated to `shape`.
Var BroadcastChannels(Tape& tape, Var v, const Shape& shape);

Var Conv2D(Tape& tape, Var x, Var weights, int stride, Padding padding,
           int groups);
Var GlobalAvgPool(Tape& tape, Var x);
Var Dense(Tape& tape, Var x, Var weights, Var bias);
Var SoftmaxCrossEntropy(Tape& tape, Var logits, std::vector<int> labels);

// Scalar sum of all elements.
Var Sum(Tape& tape, Var x);
// Scalar sum of x * weights, with constant weights of x's shape.
Var WeightedSum(Tape& tape, Var x, Tensor weights);

}  // namespace evonorm::ad

#endif  // EVONORM_CORE_AUTODIFF_HPP_
