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

#include "graph.hpp"

#include "error.hpp"

namespace evonorm {

LayerGraph LayerGraph::Empty() {
  LayerGraph g;
  g.nodes = {GraphNode::Initial(GraphNode::Kind::kX),
             GraphNode::Initial(GraphNode::Kind::kZero),
             GraphNode::Initial(GraphNode::Kind::kV0),
             GraphNode::Initial(GraphNode::Kind::kV1)};
  return g;
}

int LayerGraph::AddOp(Primitive prim, std::initializer_list<int> inputs,
                      IndexSet index) {
  if (static_cast<int>(inputs.size()) != Arity(prim)) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("wrong input count for ") + PrimitiveName(prim));
  }
  GraphNode node;
  node.op.prim = prim;
  if (IsMoment(prim)) node.op.index = index;
  int k = 0;
  for (int in : inputs) node.inputs[k++] = in;
  nodes.push_back(node);
  return output();
}

int LayerGraph::AddMoment(Primitive prim, Axes axes, int input, int groups) {
  return AddOp(prim, {input}, IndexSet{axes, axes == Axes::kWHCg ? groups : 1});
}

std::vector<bool> ReachableFromOutput(const LayerGraph& graph) {
  std::vector<bool> reach(graph.nodes.size(), false);
  if (graph.nodes.empty()) return reach;
  reach.back() = true;
  for (int i = graph.output(); i >= 0; --i) {
    if (!reach[i]) continue;
    const GraphNode& node = graph.nodes[i];
    if (node.kind != GraphNode::Kind::kOp) continue;
    for (int k = 0; k < node.op.arity(); ++k) {
      const int in = node.inputs[k];
      if (in >= 0 && in < i) reach[in] = true;
    }
  }
  return reach;
}

ValidationReport Validate(const LayerGraph& graph, int max_nodes) {
  ValidationReport report;
  auto fail = [&](std::string reason) {
    report.ok = false;
    report.reasons.push_back(std::move(reason));
  };
  const int count = static_cast<int>(graph.nodes.size());
  if (count < kNumInitialNodes) {
    fail("graph has " + std::to_string(count) + " nodes, needs at least 4");
    return report;
  }
  if (count > max_nodes) {
    fail("graph has " + std::to_string(count) + " nodes, budget is " +
         std::to_string(max_nodes));
  }
  const GraphNode::Kind initial[] = {GraphNode::Kind::kX, GraphNode::Kind::kZero,
                                     GraphNode::Kind::kV0, GraphNode::Kind::kV1};
  for (int i = 0; i < kNumInitialNodes; ++i) {
    if (graph.nodes[i].kind != initial[i]) {
      fail("node " + std::to_string(i) + " must be the initial node " +
           std::string(i == 0 ? "x" : i == 1 ? "zero" : i == 2 ? "v0" : "v1"));
    }
  }
  bool structurally_sound = report.ok;
  for (int i = kNumInitialNodes; i < count; ++i) {
    const GraphNode& node = graph.nodes[i];
    if (node.kind != GraphNode::Kind::kOp) {
      fail("node " + std::to_string(i) + " is an initial node past position 3");
      structurally_sound = false;
      continue;
    }
    for (int k = 0; k < node.op.arity(); ++k) {
      const int in = node.inputs[k];
      if (in < 0 || in >= i) {
        fail("node " + std::to_string(i) + " input " + std::to_string(k) +
             " = " + std::to_string(in) + " does not reference an earlier node");
        structurally_sound = false;
      }
    }
    if (node.op.is_moment() && node.op.index.axes == Axes::kWHCg &&
        node.op.index.groups < 1) {
      fail("node " + std::to_string(i) + " has non-positive group count");
    }
  }
  if (graph.affine_at < -1 || graph.affine_at > graph.output()) {
    fail("affine_at " + std::to_string(graph.affine_at) + " is out of range");
  }
  if (!structurally_sound) return report;

  const std::vector<bool> reach = ReachableFromOutput(graph);
  report.depends_on_x = reach[kNodeX];
  for (int i = kNumInitialNodes; i < count; ++i) {
    if (reach[i] && graph.nodes[i].op.is_batch_aggregating()) {
      report.batch_dependent = true;
    }
  }
  return report;
}

std::vector<OpKind> SampleableKinds(bool batch_independent, int groups) {
  std::vector<OpKind> kinds;
  for (Primitive p : {Primitive::kAdd, Primitive::kMul, Primitive::kDiv,
                      Primitive::kMax, Primitive::kNeg, Primitive::kSigmoid,
                      Primitive::kTanh, Primitive::kExp, Primitive::kLog,
                      Primitive::kAbs, Primitive::kSquare, Primitive::kSqrt}) {
    kinds.push_back(OpKind{p, {}});
  }
  for (Primitive p :
       {Primitive::kMean, Primitive::kRmsMoment, Primitive::kStdMoment}) {
    for (Axes a : {Axes::kBWH, Axes::kWHC, Axes::kWH, Axes::kWHCg}) {
      if (batch_independent && a == Axes::kBWH) continue;
      kinds.push_back(OpKind{p, IndexSet{a, a == Axes::kWHCg ? groups : 1}});
    }
  }
  return kinds;
}

namespace {

void ResampleNode(GraphNode& node, int position, const std::vector<OpKind>& kinds,
                  std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick_kind(0, kinds.size() - 1);
  node.kind = GraphNode::Kind::kOp;
  node.op = kinds[pick_kind(rng)];
  std::uniform_int_distribution<int> pick_input(0, position - 1);
  node.inputs = {-1, -1};
  for (int k = 0; k < node.op.arity(); ++k) node.inputs[k] = pick_input(rng);
}

}  // namespace

LayerGraph GenerateRandom(std::mt19937_64& rng, const GenerationOptions& options) {
  if (options.intermediate_count < 1) {
    Fail(ErrorCode::kInvalidArgument, "intermediate_count must be >= 1");
  }
  const std::vector<OpKind> kinds =
      SampleableKinds(options.batch_independent, options.groups);
  LayerGraph g = LayerGraph::Empty();
  for (int i = 0; i < options.intermediate_count; ++i) {
    GraphNode node;
    ResampleNode(node, static_cast<int>(g.nodes.size()), kinds, rng);
    g.nodes.push_back(node);
  }
  return g;
}

LayerGraph Mutate(const LayerGraph& graph, std::mt19937_64& rng,
                  const GenerationOptions& options) {
  LayerGraph out = graph;
  if (graph.intermediate_count() < 1) return out;
  std::uniform_int_distribution<int> pick_node(kNumInitialNodes, graph.output());
  const int target = pick_node(rng);
  ResampleNode(out.nodes[target], target,
               SampleableKinds(options.batch_independent, options.groups), rng);
  return out;
}

LayerGraph WithGroups(const LayerGraph& graph, int groups) {
  LayerGraph out = graph;
  for (GraphNode& node : out.nodes) {
    if (node.kind == GraphNode::Kind::kOp && node.op.is_moment() &&
        node.op.index.axes == Axes::kWHCg) {
      node.op.index.groups = groups;
    }
  }
  return out;
}

}  // namespace evonorm
