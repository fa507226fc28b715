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

// The genotype: a normalization-activation layer as a DAG over the search
// primitives. Nodes 0..3 are always x, the zero tensor, v0 and v1; every
// later node applies one primitive to strictly earlier nodes, and the last
// node is the layer output.

#ifndef EVONORM_CORE_GRAPH_HPP_
#define EVONORM_CORE_GRAPH_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace evonorm {

inline constexpr int kNumInitialNodes = 4;
inline constexpr int kDefaultIntermediateNodes = 10;
inline constexpr int kMaxGraphNodes = kNumInitialNodes + kDefaultIntermediateNodes;

inline constexpr int kNodeX = 0;
inline constexpr int kNodeZero = 1;
inline constexpr int kNodeV0 = 2;
inline constexpr int kNodeV1 = 3;

struct OpKind {
  Primitive prim = Primitive::kAdd;
  IndexSet index;  // meaningful for moments only

  int arity() const { return Arity(prim); }
  bool is_moment() const { return IsMoment(prim); }
  bool is_batch_aggregating() const {
    return is_moment() && index.axes == Axes::kBWH;
  }
  bool operator==(const OpKind& o) const {
    if (prim != o.prim) return false;
    if (!is_moment()) return true;
    if (index.axes != o.index.axes) return false;
    return index.axes != Axes::kWHCg || index.groups == o.index.groups;
  }
};

struct GraphNode {
  enum class Kind : std::uint8_t { kX, kZero, kV0, kV1, kOp };

  Kind kind = Kind::kOp;
  OpKind op;
  std::array<int, 2> inputs{-1, -1};

  static GraphNode Initial(Kind kind) {
    GraphNode n;
    n.kind = kind;
    return n;
  }
  bool operator==(const GraphNode& o) const {
    if (kind != o.kind) return false;
    if (kind != Kind::kOp) return true;
    if (!(op == o.op)) return false;
    for (int i = 0; i < op.arity(); ++i) {
      if (inputs[i] != o.inputs[i]) return false;
    }
    return true;
  }
};

struct LayerGraph {
  std::vector<GraphNode> nodes;
  // Node whose value receives the channel-wise affine transform
  // (value * gamma + beta). -1 means the output node, which is the default
  // for every searched graph.
  int affine_at = -1;

  int output() const { return static_cast<int>(nodes.size()) - 1; }
  int affine_node() const { return affine_at < 0 ? output() : affine_at; }
  int intermediate_count() const {
    return static_cast<int>(nodes.size()) - kNumInitialNodes;
  }

  // Graph with only the four initial nodes.
  static LayerGraph Empty();
  // Appends an op node and returns its index.
  int AddOp(Primitive prim, std::initializer_list<int> inputs,
            IndexSet index = {});
  int AddMoment(Primitive prim, Axes axes, int input, int groups = 1);

  bool operator==(const LayerGraph& o) const {
    return nodes == o.nodes && affine_node() == o.affine_node();
  }
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> reasons;
  bool batch_dependent = false;  // some reachable node aggregates over (b,w,h)
  bool depends_on_x = false;     // the output transitively reads node x
};

ValidationReport Validate(const LayerGraph& graph, int max_nodes = kMaxGraphNodes);

// Nodes that feed the output (the output included).
std::vector<bool> ReachableFromOutput(const LayerGraph& graph);

// Every sampleable op kind: 12 element-wise ops plus 3 moments x 4 index
// sets, minus the (b,w,h) moments when `batch_independent`.
std::vector<OpKind> SampleableKinds(bool batch_independent, int groups);

struct GenerationOptions {
  int intermediate_count = kDefaultIntermediateNodes;
  bool batch_independent = false;
  int groups = 8;
};

LayerGraph GenerateRandom(std::mt19937_64& rng, const GenerationOptions& options);

// Picks an intermediate node uniformly, gives it a uniformly drawn op kind and
// re-samples its inputs uniformly from strictly earlier nodes.
LayerGraph Mutate(const LayerGraph& graph, std::mt19937_64& rng,
                  const GenerationOptions& options);

// Rewrites the group count of every (w,h,c/g) moment.
LayerGraph WithGroups(const LayerGraph& graph, int groups);

// Infix form, e.g. "x / max(s_bwh(x), v1*x + s_wh(x)) * gamma + beta".
std::string RenderExpression(const LayerGraph& graph);

// JSON codec. Nodes are {"op", "inputs"?, "index_set"?, "groups"?}.
std::string SerializeGraph(const LayerGraph& graph);
LayerGraph DeserializeGraph(const std::string& text);

}  // namespace evonorm

#endif  // EVONORM_CORE_GRAPH_HPP_
