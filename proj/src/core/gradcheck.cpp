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


#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "layer.hpp"
#include "train.hpp"
#include "zoo.hpp"

namespace evonorm {

namespace {

Tensor Normal(const Shape& shape, std::mt19937_64& rng, double mean = 0.0,
              double stddev = 1.0) {
  std::normal_distribution<double> dist(mean, stddev);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Shape ChannelShape(int c) { return Shape{1, 1, 1, c}; }

// FNV-1a, so that per-case streams do not depend on the standard library.
std::uint64_t NameHash(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : name) h = (h ^ ch) * 1099511628211ull;
  return h;
}

struct Evaluation {
  double loss = 0.0;
  double margin = 0.0;
  std::vector<Tensor> grads;
};

Evaluation Evaluate(const std::vector<Tensor>& inputs, const GradcheckBuilder& build,
                    const Tensor* weights, Tensor* out_value, bool with_grad) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(with_grad ? tape.Variable(t) : tape.Constant(t));
  const ad::Var out = build(tape, vars);
  if (out_value) *out_value = tape.value(out);
  Evaluation e;
  if (!weights) return e;
  const ad::Var loss = ad::WeightedSum(tape, out, *weights);
  e.loss = tape.value(loss)[0];
  e.margin = tape.min_kink_margin();
  if (with_grad) {
    tape.Backward(loss);
    for (ad::Var v : vars) e.grads.push_back(tape.grad(v));
  }
  return e;
}

}  // namespace

GradcheckResult CheckGradient(const std::string& name, const GradcheckSampler& sample,
                              const GradcheckBuilder& build,
                              const GradcheckOptions& options) {
  GradcheckResult result;
  result.name = name;
  std::mt19937_64 rng(DeriveSeed(options.seed, NameHash(name)));
  std::vector<Tensor> inputs;
  Tensor weights;
  Evaluation analytic;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    result.attempts = attempt;
    inputs = sample(rng);
    Tensor out;
    Evaluate(inputs, build, nullptr, &out, false);
    weights = Normal(out.shape(), rng);
    analytic = Evaluate(inputs, build, &weights, nullptr, true);
    if (analytic.margin >= options.min_margin) break;
  }
  result.kink_margin = analytic.margin;
  if (analytic.margin < options.min_margin) return result;

  double diff2 = 0.0;
  double ad2 = 0.0;
  double fd2 = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double saved = inputs[i][j];
      inputs[i][j] = saved + options.step;
      const double up = Evaluate(inputs, build, &weights, nullptr, false).loss;
      inputs[i][j] = saved - options.step;
      const double down = Evaluate(inputs, build, &weights, nullptr, false).loss;
      inputs[i][j] = saved;
      const double fd = (up - down) / (2.0 * options.step);
      const double g = analytic.grads[i][j];
      diff2 += (g - fd) * (g - fd);
      ad2 += g * g;
      fd2 += fd * fd;
    }
  }
  const double scale = std::sqrt(std::max(ad2, fd2));
  result.relative_error = scale > 0 ? std::sqrt(diff2) / scale : std::sqrt(diff2);
  result.passed = std::isfinite(result.relative_error) &&
                  result.relative_error <= options.tolerance;
  return result;
}

GradcheckResult CheckLayerGradient(const std::string& name, const LayerGraph& graph,
                                   const GradcheckOptions& options) {
  const Shape shape = options.shape;
  const int c = shape.c;
  auto sample = [shape, c](std::mt19937_64& rng) {
    return std::vector<Tensor>{Normal(shape, rng), Normal(ChannelShape(c), rng, 1.0, 0.3),
                               Normal(ChannelShape(c), rng, 0.0, 0.3),
                               Normal(ChannelShape(c), rng, 0.0, 0.3),
                               Normal(ChannelShape(c), rng, 1.0, 0.3)};
  };
  auto build = [&graph, c](ad::Tape& tape, std::span<const ad::Var> v) {
    EmaStore ema = EmaStore::ForGraph(graph, c);
    return ForwardOnTape(tape, graph, v[0], LayerVars{v[1], v[2], v[3], v[4]}, ema,
                         EvalMode::kTraining);
  };
  return CheckGradient(name, sample, build, options);
}

std::vector<GradcheckResult> RunGradcheckSuite(const GradcheckOptions& options) {
  std::vector<GradcheckResult> out;
  const Shape shape = options.shape;
  auto one = [shape](std::mt19937_64& rng) { return std::vector<Tensor>{Normal(shape, rng)}; };
  auto two = [shape](std::mt19937_64& rng) {
    return std::vector<Tensor>{Normal(shape, rng), Normal(shape, rng)};
  };
  auto with_channel = [shape](std::mt19937_64& rng) {
    return std::vector<Tensor>{Normal(shape, rng), Normal(ChannelShape(shape.c), rng)};
  };
  for (Primitive p : {Primitive::kNeg, Primitive::kSigmoid, Primitive::kTanh,
                      Primitive::kExp, Primitive::kLog, Primitive::kAbs,
                      Primitive::kSquare, Primitive::kSqrt}) {
    out.push_back(CheckGradient(
        PrimitiveName(p), one,
        [p](ad::Tape& t, std::span<const ad::Var> v) { return ad::Unary(t, p, v[0]); },
        options));
  }
  for (Primitive p : {Primitive::kAdd, Primitive::kMul, Primitive::kDiv, Primitive::kMax}) {
    auto build = [p](ad::Tape& t, std::span<const ad::Var> v) {
      return ad::Binary(t, p, v[0], v[1]);
    };
    auto swapped = [p](ad::Tape& t, std::span<const ad::Var> v) {
      return ad::Binary(t, p, v[1], v[0]);
    };
    const std::string name = PrimitiveName(p);
    out.push_back(CheckGradient(name, two, build, options));
    out.push_back(CheckGradient(name + "_channel_rhs", with_channel, build, options));
    out.push_back(CheckGradient(name + "_channel_lhs", with_channel, swapped, options));
  }
  for (Primitive p : {Primitive::kMean, Primitive::kRmsMoment, Primitive::kStdMoment}) {
    for (Axes a : {Axes::kBWH, Axes::kWHC, Axes::kWH, Axes::kWHCg}) {
      const IndexSet index{a, a == Axes::kWHCg ? options.groups : 1};
      out.push_back(CheckGradient(
          std::string(PrimitiveName(p)) + "_" + AxesName(a), one,
          [p, index](ad::Tape& t, std::span<const ad::Var> v) {
            return ad::Moment(t, p, index, v[0]);
          },
          options));
    }
  }
  for (const std::string& name : ZooNames()) {
    const ZooEntry entry = Zoo(name, options.groups);
    out.push_back(CheckLayerGradient("zoo/" + name, entry.graph, options));
  }
  return out;
}

}  // namespace evonorm
