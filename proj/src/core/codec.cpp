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

#include "codec.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "error.hpp"

namespace evonorm {

namespace {

using nlohmann::json;

constexpr std::array<Primitive, kNumPrimitives> kAllPrimitives = {
    Primitive::kAdd,     Primitive::kMul,  Primitive::kDiv,
    Primitive::kMax,     Primitive::kNeg,  Primitive::kSigmoid,
    Primitive::kTanh,    Primitive::kExp,  Primitive::kLog,
    Primitive::kAbs,     Primitive::kSquare, Primitive::kSqrt,
    Primitive::kMean,    Primitive::kRmsMoment, Primitive::kStdMoment};

const char* InitialName(GraphNode::Kind kind) {
  switch (kind) {
    case GraphNode::Kind::kX: return "x";
    case GraphNode::Kind::kZero: return "zero";
    case GraphNode::Kind::kV0: return "v0";
    case GraphNode::Kind::kV1: return "v1";
    default: return "";
  }
}

[[noreturn]] void FieldError(const std::string& field, const std::string& what) {
  Fail(ErrorCode::kParse, field + ": " + what);
}

int LineOf(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

json GraphToJson(const LayerGraph& graph) {
  json nodes = json::array();
  for (const GraphNode& node : graph.nodes) {
    json n;
    if (node.kind != GraphNode::Kind::kOp) {
      n["op"] = InitialName(node.kind);
    } else {
      n["op"] = PrimitiveName(node.op.prim);
      json inputs = json::array();
      for (int k = 0; k < node.op.arity(); ++k) inputs.push_back(node.inputs[k]);
      n["inputs"] = inputs;
      if (node.op.is_moment()) {
        n["index_set"] = AxesName(node.op.index.axes);
        if (node.op.index.axes == Axes::kWHCg) n["groups"] = node.op.index.groups;
      }
    }
    nodes.push_back(std::move(n));
  }
  json doc;
  doc["nodes"] = std::move(nodes);
  if (graph.affine_node() != graph.output()) doc["affine_at"] = graph.affine_at;
  return doc;
}

LayerGraph GraphFromJson(const json& doc) {
  if (!doc.is_object()) FieldError("<root>", "expected an object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    FieldError("nodes", "missing or not an array");
  }
  LayerGraph graph;
  const json& nodes = doc["nodes"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    if (!n.is_object()) FieldError(where, "expected an object");
    if (!n.contains("op") || !n["op"].is_string()) {
      FieldError(where + ".op", "missing or not a string");
    }
    const std::string op = n["op"].get<std::string>();
    GraphNode node;
    bool initial = false;
    for (auto kind : {GraphNode::Kind::kX, GraphNode::Kind::kZero,
                      GraphNode::Kind::kV0, GraphNode::Kind::kV1}) {
      if (op == InitialName(kind)) {
        node.kind = kind;
        initial = true;
      }
    }
    if (!initial) {
      auto it = std::find_if(kAllPrimitives.begin(), kAllPrimitives.end(),
                             [&](Primitive p) { return op == PrimitiveName(p); });
      if (it == kAllPrimitives.end()) {
        FieldError(where + ".op", "unknown op '" + op + "'");
      }
      node.kind = GraphNode::Kind::kOp;
      node.op.prim = *it;
      if (!n.contains("inputs") || !n["inputs"].is_array()) {
        FieldError(where + ".inputs", "missing or not an array");
      }
      const json& inputs = n["inputs"];
      if (static_cast<int>(inputs.size()) != node.op.arity()) {
        FieldError(where + ".inputs", "op '" + op + "' takes " +
                                          std::to_string(node.op.arity()) +
                                          " inputs, got " +
                                          std::to_string(inputs.size()));
      }
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (!inputs[k].is_number_integer()) {
          FieldError(where + ".inputs[" + std::to_string(k) + "]", "not an integer");
        }
        node.inputs[k] = inputs[k].get<int>();
      }
      if (node.op.is_moment()) {
        if (!n.contains("index_set") || !n["index_set"].is_string()) {
          FieldError(where + ".index_set", "missing for moment op '" + op + "'");
        }
        const std::string axes = n["index_set"].get<std::string>();
        bool found = false;
        for (Axes a : {Axes::kBWH, Axes::kWHC, Axes::kWH, Axes::kWHCg}) {
          if (axes == AxesName(a)) {
            node.op.index.axes = a;
            found = true;
          }
        }
        if (!found) FieldError(where + ".index_set", "unknown index set '" + axes + "'");
        if (node.op.index.axes == Axes::kWHCg) {
          if (!n.contains("groups") || !n["groups"].is_number_integer() ||
              n["groups"].get<int>() < 1) {
            FieldError(where + ".groups", "whcg needs a positive integer group count");
          }
          node.op.index.groups = n["groups"].get<int>();
        }
      }
    }
    graph.nodes.push_back(node);
  }
  if (doc.contains("affine_at")) {
    if (!doc["affine_at"].is_number_integer()) FieldError("affine_at", "not an integer");
    graph.affine_at = doc["affine_at"].get<int>();
    if (graph.affine_at == graph.output()) graph.affine_at = -1;
  }
  const ValidationReport report = Validate(graph, static_cast<int>(graph.nodes.size()));
  if (!report.ok) FieldError("nodes", report.reasons.front());
  return graph;
}

std::string SerializeGraph(const LayerGraph& graph) {
  return GraphToJson(graph).dump();
}

LayerGraph DeserializeGraph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, "line " + std::to_string(LineOf(text, e.byte)) +
                                ": " + e.what());
  }
  return GraphFromJson(doc);
}

}  // namespace evonorm
