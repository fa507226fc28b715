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

#include <string>

#include "error.hpp"
#include "graph.hpp"

namespace evonorm {

namespace {

// Binding strength of the rendered text.
enum Precedence { kAdditive = 1, kMultiplicative = 2, kPrefix = 3, kAtom = 4 };

struct Rendered {
  std::string text;
  int precedence = kAtom;
};

std::string Paren(const Rendered& r, bool wrap) {
  return wrap ? "(" + r.text + ")" : r.text;
}

std::string MomentToken(const OpKind& op) {
  std::string prefix;
  switch (op.prim) {
    case Primitive::kMean: prefix = "mu_"; break;
    case Primitive::kRmsMoment: prefix = "rms_"; break;
    default: prefix = "s_"; break;
  }
  return prefix + AxesName(op.index.axes);
}

class Renderer {
 public:
  explicit Renderer(const LayerGraph& graph) : graph_(graph) {}

  Rendered Node(int i) const {
    Rendered raw = Raw(i);
    if (i != graph_.affine_node()) return raw;
    return {Paren(raw, raw.precedence < kMultiplicative) + " * gamma + beta",
            kAdditive};
  }

 private:
  bool IsParameterVector(int i) const {
    const auto kind = graph_.nodes[i].kind;
    return kind == GraphNode::Kind::kV0 || kind == GraphNode::Kind::kV1;
  }
  bool IsPlainNeg(int i) const {
    const GraphNode& n = graph_.nodes[i];
    return n.kind == GraphNode::Kind::kOp && n.op.prim == Primitive::kNeg &&
           i != graph_.affine_node();
  }

  Rendered Raw(int i) const {
    const GraphNode& node = graph_.nodes[i];
    switch (node.kind) {
      case GraphNode::Kind::kX: return {"x", kAtom};
      case GraphNode::Kind::kZero: return {"0", kAtom};
      case GraphNode::Kind::kV0: return {"v0", kAtom};
      case GraphNode::Kind::kV1: return {"v1", kAtom};
      case GraphNode::Kind::kOp: break;
    }
    const int a = node.inputs[0];
    const int b = node.inputs[1];
    const OpKind& op = node.op;
    if (op.is_moment()) return {MomentToken(op) + "(" + Node(a).text + ")", kAtom};
    switch (op.prim) {
      case Primitive::kAdd: {
        const Rendered left = Node(a);
        if (IsPlainNeg(b)) {
          const Rendered right = Node(graph_.nodes[b].inputs[0]);
          return {left.text + " - " + Paren(right, right.precedence <= kAdditive),
                  kAdditive};
        }
        const Rendered right = Node(b);
        return {left.text + " + " + Paren(right, right.precedence <= kAdditive),
                kAdditive};
      }
      case Primitive::kMul: {
        const Rendered left = Node(a);
        const Rendered right = Node(b);
        if (IsParameterVector(a) && right.precedence == kAtom) {
          return {left.text + "*" + right.text, kMultiplicative};
        }
        return {Paren(left, left.precedence < kMultiplicative) + " * " +
                    Paren(right, right.precedence <= kMultiplicative),
                kMultiplicative};
      }
      case Primitive::kDiv: {
        const Rendered left = Node(a);
        const Rendered right = Node(b);
        return {Paren(left, left.precedence < kMultiplicative) + " / " +
                    Paren(right, right.precedence <= kMultiplicative),
                kMultiplicative};
      }
      case Primitive::kMax:
        return {"max(" + Node(a).text + ", " + Node(b).text + ")", kAtom};
      case Primitive::kNeg: {
        const Rendered inner = Node(a);
        return {"-" + Paren(inner, inner.precedence < kAtom), kPrefix};
      }
      default:
        return {std::string(PrimitiveName(op.prim)) + "(" + Node(a).text + ")",
                kAtom};
    }
  }

  const LayerGraph& graph_;
};

}  // namespace

std::string RenderExpression(const LayerGraph& graph) {
  const ValidationReport report = Validate(graph, static_cast<int>(graph.nodes.size()));
  if (!report.ok) {
    Fail(ErrorCode::kInvalidArgument,
         "cannot render an invalid graph: " + report.reasons.front());
  }
  return Renderer(graph).Node(graph.output()).text;
}

}  // namespace evonorm
