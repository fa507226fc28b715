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


#include "zoo.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "error.hpp"

namespace evonorm {

namespace {

using P = Primitive;

// Small builder so that formulas read close to their written form.
class Builder {
 public:
  explicit Builder(int groups) : g_(LayerGraph::Empty()), groups_(groups) {}

  int x() const { return kNodeX; }
  int zero() const { return kNodeZero; }
  int v0() const { return kNodeV0; }
  int v1() const { return kNodeV1; }

  int add(int a, int b) { return g_.AddOp(P::kAdd, {a, b}); }
  int sub(int a, int b) { return add(a, g_.AddOp(P::kNeg, {b})); }
  int mul(int a, int b) { return g_.AddOp(P::kMul, {a, b}); }
  int div(int a, int b) { return g_.AddOp(P::kDiv, {a, b}); }
  int max(int a, int b) { return g_.AddOp(P::kMax, {a, b}); }
  int neg(int a) { return g_.AddOp(P::kNeg, {a}); }
  int sigmoid(int a) { return g_.AddOp(P::kSigmoid, {a}); }
  int tanh(int a) { return g_.AddOp(P::kTanh, {a}); }
  int exp(int a) { return g_.AddOp(P::kExp, {a}); }
  int abs(int a) { return g_.AddOp(P::kAbs, {a}); }
  int sqrt(int a) { return g_.AddOp(P::kSqrt, {a}); }
  int mean(Axes axes, int a) { return g_.AddMoment(P::kMean, axes, a, groups_); }
  int rms(Axes axes, int a) { return g_.AddMoment(P::kRmsMoment, axes, a, groups_); }
  int std(Axes axes, int a) { return g_.AddMoment(P::kStdMoment, axes, a, groups_); }

  // Marks the node that receives "* gamma + beta" when it is not the output.
  void affine_at(int node) { g_.affine_at = node; }

  LayerGraph Finish() {
    if (g_.affine_at == g_.output()) g_.affine_at = -1;
    return g_;
  }

 private:
  LayerGraph g_;
  int groups_;
};

using Recipe = std::function<LayerGraph(Builder&)>;

// x / max(s_bwh(x), z)
LayerGraph BatchMaxDenominator(Builder& b, const std::function<int(Builder&)>& z) {
  const int global = b.std(Axes::kBWH, b.x());
  const int local = z(b);
  b.div(b.x(), b.max(global, local));
  return b.Finish();
}

// (x - mu(x)) / s(x), affine, then `activation` of the result.
LayerGraph Standardized(Builder& b, Axes axes,
                        const std::function<void(Builder&, int)>& activation) {
  const int centered = b.sub(b.x(), b.mean(axes, b.x()));
  const int z = b.div(centered, b.std(axes, b.x()));
  b.affine_at(z);
  activation(b, z);
  return b.Finish();
}

void Relu(Builder& b, int z) { b.max(z, b.zero()); }
void Swish(Builder& b, int z) { b.mul(z, b.sigmoid(b.mul(b.v1(), z))); }

// x * act(x) / moment_whcg(x)
LayerGraph GatedGroupNorm(Builder& b, int gate, P moment) {
  const int num = b.mul(b.x(), gate);
  const int den = moment == P::kRmsMoment ? b.rms(Axes::kWHCg, b.x())
                                          : b.std(Axes::kWHCg, b.x());
  b.div(num, den);
  return b.Finish();
}

LayerGraph B0(Builder& b) {
  return BatchMaxDenominator(b, [](Builder& b) {
    const int scaled = b.mul(b.v1(), b.x());
    return b.add(scaled, b.std(Axes::kWH, b.x()));
  });
}
LayerGraph B1(Builder& b) {
  // The constant 1 of (x + 1) is expressed through v1, which starts at 1.
  return BatchMaxDenominator(b, [](Builder& b) {
    const int shifted = b.add(b.x(), b.v1());
    return b.mul(shifted, b.rms(Axes::kWH, b.x()));
  });
}
LayerGraph B2(Builder& b) {
  return BatchMaxDenominator(
      b, [](Builder& b) { return b.sub(b.rms(Axes::kWH, b.x()), b.x()); });
}
LayerGraph XPlusRmsWhc(Builder& b) {
  return BatchMaxDenominator(
      b, [](Builder& b) { return b.add(b.x(), b.rms(Axes::kWHC, b.x())); });
}
LayerGraph XTimesRmsWh(Builder& b) {
  return BatchMaxDenominator(
      b, [](Builder& b) { return b.mul(b.x(), b.rms(Axes::kWH, b.x())); });
}
LayerGraph RmsWhcMinusX(Builder& b) {
  return BatchMaxDenominator(
      b, [](Builder& b) { return b.sub(b.rms(Axes::kWHC, b.x()), b.x()); });
}
LayerGraph XPlusStdWh(Builder& b) {
  return BatchMaxDenominator(
      b, [](Builder& b) { return b.add(b.x(), b.std(Axes::kWH, b.x())); });
}
LayerGraph NegSwishOverBatchStd(Builder& b) {
  const int negated = b.neg(b.x());
  const int num = b.mul(negated, b.sigmoid(b.x()));
  b.div(num, b.std(Axes::kBWH, b.x()));
  return b.Finish();
}
LayerGraph S0(Builder& b) {
  return GatedGroupNorm(b, b.sigmoid(b.mul(b.v1(), b.x())), P::kStdMoment);
}
LayerGraph S1(Builder& b) {
  return GatedGroupNorm(b, b.sigmoid(b.x()), P::kStdMoment);
}
LayerGraph S2(Builder& b) {
  return GatedGroupNorm(b, b.sigmoid(b.x()), P::kRmsMoment);
}
LayerGraph TanhSigmoidGate(Builder& b) {
  return GatedGroupNorm(b, b.tanh(b.sigmoid(b.x())), P::kRmsMoment);
}
LayerGraph SigmoidOfMaxGate(Builder& b) {
  const int z = b.div(b.x(), b.rms(Axes::kWHCg, b.x()));
  b.mul(z, b.sigmoid(b.max(b.x(), z)));
  return b.Finish();
}

struct Definition {
  const char* name;
  Recipe recipe;
  const char* description;
};

const std::vector<Definition>& Definitions() {
  static const std::vector<Definition> defs = {
      {"bn_relu",
       [](Builder& b) { return Standardized(b, Axes::kBWH, Relu); },
       "batch normalization followed by ReLU"},
      {"bn_silu",
       [](Builder& b) { return Standardized(b, Axes::kBWH, Swish); },
       "batch normalization followed by SiLU/Swish z*sigmoid(v1*z)"},
      {"gn_relu",
       [](Builder& b) { return Standardized(b, Axes::kWHCg, Relu); },
       "group normalization followed by ReLU"},
      {"gn_silu",
       [](Builder& b) { return Standardized(b, Axes::kWHCg, Swish); },
       "group normalization followed by SiLU/Swish z*sigmoid(v1*z)"},
      {"frn",
       [](Builder& b) {
         const int z = b.div(b.x(), b.rms(Axes::kWH, b.x()));
         b.affine_at(z);
         b.max(z, b.v0());
         return b.Finish();
       },
       "filter response normalization with a learned threshold"},
      {"ln_relu",
       [](Builder& b) { return Standardized(b, Axes::kWHC, Relu); },
       "layer normalization followed by ReLU"},
      {"random_table3",
       [](Builder& b) {
         b.sqrt(b.std(Axes::kWH, b.sigmoid(b.abs(b.x()))));
         return b.Finish();
       },
       "a random layer that fails to train"},
      {"rs_rej_table3",
       [](Builder& b) {
         const int relu = b.max(b.x(), b.zero());
         b.div(relu, b.rms(Axes::kBWH, b.x()));
         return b.Finish();
       },
       "best layer found by random search with rejection"},
      {"evonorm_b0", B0, "EvoNorm-B0"},
      {"evonorm_b1", B1, "EvoNorm-B1"},
      {"evonorm_b2", B2, "EvoNorm-B2"},
      {"evonorm_s0", S0, "EvoNorm-S0"},
      {"evonorm_s1", S1, "EvoNorm-S1"},
      {"evonorm_s2", S2, "EvoNorm-S2"},
      {"b0_ablation_no_v1x",
       [](Builder& b) {
         return BatchMaxDenominator(
             b, [](Builder& b) { return b.std(Axes::kWH, b.x()); });
       },
       "B0 without the v1*x term"},
      {"b0_ablation_no_local",
       [](Builder& b) {
         b.div(b.x(), b.std(Axes::kBWH, b.x()));
         return b.Finish();
       },
       "B0 without the per-sample term"},
      {"b0_ablation_no_global",
       [](Builder& b) {
         const int scaled = b.mul(b.v1(), b.x());
         b.div(b.x(), b.add(scaled, b.std(Axes::kWH, b.x())));
         return b.Finish();
       },
       "B0 without the batch term"},
      {"b0_ablation_add",
       [](Builder& b) {
         const int global = b.std(Axes::kBWH, b.x());
         const int partial = b.add(global, b.mul(b.v1(), b.x()));
         const int den = b.add(partial, b.std(Axes::kWH, b.x()));
         b.div(b.x(), den);
         return b.Finish();
       },
       "B0 with max replaced by a sum"},
      {"b_cand_01", B1, "B candidate 1"},
      {"b_cand_02", XPlusRmsWhc, "B candidate 2"},
      {"b_cand_03", NegSwishOverBatchStd, "B candidate 3"},
      {"b_cand_04", XTimesRmsWh, "B candidate 4"},
      {"b_cand_05", RmsWhcMinusX, "B candidate 5"},
      {"b_cand_06", B0, "B candidate 6"},
      {"b_cand_07", B2, "B candidate 7"},
      {"b_cand_08", XTimesRmsWh, "B candidate 8, same as candidate 4"},
      {"b_cand_09", XPlusStdWh, "B candidate 9"},
      {"b_cand_10", XPlusStdWh, "B candidate 10, same as candidate 9"},
      {"s_cand_01", TanhSigmoidGate, "S candidate 1"},
      {"s_cand_02", S2, "S candidate 2"},
      {"s_cand_03", S2, "S candidate 3, same as candidate 2"},
      {"s_cand_04", S2, "S candidate 4, same as candidate 2"},
      {"s_cand_05", S1, "S candidate 5"},
      {"s_cand_06", S0, "S candidate 6"},
      {"s_cand_07", S1, "S candidate 7, same as candidate 5"},
      {"s_cand_08", S2, "S candidate 8, same as candidate 2"},
      {"s_cand_09", S1, "S candidate 9, same as candidate 5"},
      {"s_cand_10", SigmoidOfMaxGate, "S candidate 10"},
  };
  return defs;
}

}  // namespace

const std::vector<std::string>& ZooNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Definition& d : Definitions()) out.emplace_back(d.name);
    return out;
  }();
  return names;
}

bool IsZooName(const std::string& name) {
  const auto& names = ZooNames();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ZooEntry Zoo(const std::string& name, int groups) {
  if (groups < 1) Fail(ErrorCode::kInvalidArgument, "groups must be >= 1");
  for (const Definition& d : Definitions()) {
    if (name != d.name) continue;
    Builder builder(groups);
    return ZooEntry{d.name, d.recipe(builder), groups, d.description};
  }
  std::string valid;
  for (const std::string& n : ZooNames()) valid += (valid.empty() ? "" : ", ") + n;
  Fail(ErrorCode::kUnknownName,
       "unknown layer '" + name + "'; valid names: " + valid);
}

}  // namespace evonorm
