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


#include "layer.hpp"

#include <optional>

#include "error.hpp"

namespace evonorm {

namespace {

double EmaInitialValue(Primitive moment) {
  return moment == Primitive::kMean ? 0.0 : 1.0;
}

std::vector<double>& EmaEntry(EmaStore& ema, const GraphNode& node, int index,
                              int channels) {
  auto [it, inserted] = ema.stats.try_emplace(index);
  if (inserted || static_cast<int>(it->second.size()) != channels) {
    it->second.assign(channels, EmaInitialValue(node.op.prim));
  }
  return it->second;
}

}  // namespace

LayerParams LayerParams::Default(int channels) {
  const Shape shape{1, 1, 1, channels};
  return {Tensor(shape, 1.0), Tensor(shape, 0.0), Tensor(shape, 0.0),
          Tensor(shape, 1.0)};
}

EmaStore EmaStore::ForGraph(const LayerGraph& graph, int channels,
                            double momentum) {
  EmaStore store;
  store.momentum = momentum;
  for (int i = kNumInitialNodes; i < static_cast<int>(graph.nodes.size()); ++i) {
    const GraphNode& node = graph.nodes[i];
    if (node.op.is_batch_aggregating()) {
      store.stats[i].assign(channels, EmaInitialValue(node.op.prim));
    }
  }
  return store;
}

ad::Var ForwardOnTape(ad::Tape& tape, const LayerGraph& graph, ad::Var x,
                      const LayerVars& params, EmaStore& ema, EvalMode mode) {
  const Shape shape = tape.value(x).shape();
  const int channels = shape.c;
  for (ad::Var p : {params.gamma, params.beta, params.v0, params.v1}) {
    const Tensor& value = tape.value(p);
    if (!value.is_channel_vector() || value.channels() != channels) {
      Fail(ErrorCode::kShapeMismatch,
           "layer parameters have shape " + value.shape().ToString() +
               " but the input has " + std::to_string(channels) + " channels");
    }
  }

  const std::vector<bool> reach = ReachableFromOutput(graph);
  const int affine = graph.affine_node();
  std::vector<std::optional<ad::Var>> values(graph.nodes.size());
  for (int i = 0; i < static_cast<int>(graph.nodes.size()); ++i) {
    if (!reach[i]) continue;
    const GraphNode& node = graph.nodes[i];
    ad::Var out;
    switch (node.kind) {
      case GraphNode::Kind::kX: out = x; break;
      case GraphNode::Kind::kZero:
        out = tape.Constant(Tensor(Shape{1, 1, 1, channels}, 0.0));
        break;
      case GraphNode::Kind::kV0: out = params.v0; break;
      case GraphNode::Kind::kV1: out = params.v1; break;
      case GraphNode::Kind::kOp: {
        const ad::Var a = *values[node.inputs[0]];
        if (node.op.is_batch_aggregating()) {
          const int in_channels = tape.value(a).channels();
          std::vector<double>& entry = EmaEntry(ema, node, i, in_channels);
          if (mode == EvalMode::kInference) {
            out = tape.Constant(Tensor::ChannelVector(entry));
          } else {
            out = ad::Moment(tape, node.op.prim, node.op.index, a);
            // Every (b,w,h) cell is one channel, so the first pixel holds
            // the per-channel statistic.
            const Tensor& stat = tape.value(out);
            for (int c = 0; c < in_channels; ++c) {
              entry[c] = ema.momentum * entry[c] + (1.0 - ema.momentum) * stat[c];
            }
          }
        } else if (node.op.arity() == 2) {
          const ad::Var b = *values[node.inputs[1]];
          out = ad::Binary(tape, node.op.prim, a, b);
        } else if (node.op.is_moment()) {
          out = ad::Moment(tape, node.op.prim, node.op.index, a);
        } else {
          out = ad::Unary(tape, node.op.prim, a);
        }
        break;
      }
    }
    if (i == affine) {
      out = ad::Add(tape, ad::Mul(tape, out, params.gamma), params.beta);
    }
    values[i] = out;
  }
  ad::Var result = *values[graph.output()];
  if (tape.value(result).shape() != shape) {
    result = ad::BroadcastChannels(tape, result, shape);
  }
  return result;
}

Tensor Forward(const LayerGraph& graph, const Tensor& x,
               const LayerParams& params, EmaStore& ema, EvalMode mode) {
  ad::Tape tape;
  const LayerVars vars{tape.Constant(params.gamma), tape.Constant(params.beta),
                       tape.Constant(params.v0), tape.Constant(params.v1)};
  const ad::Var out =
      ForwardOnTape(tape, graph, tape.Constant(x), vars, ema, mode);
  return tape.value(out);
}

}  // namespace evonorm
