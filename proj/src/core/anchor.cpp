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


#include "anchor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "error.hpp"

namespace evonorm {

namespace {

int Scaled(int base, double multiplier) {
  return std::max(1, static_cast<int>(std::lround(base * multiplier)));
}

}  // namespace

const char* AnchorName(AnchorKind kind) {
  switch (kind) {
    case AnchorKind::kR: return "R";
    case AnchorKind::kM: return "M";
    case AnchorKind::kE: return "E";
  }
  return "?";
}

AnchorKind ParseAnchor(const std::string& name) {
  std::string s;
  for (char ch : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s.rfind("anchor_", 0) == 0) s = s.substr(7);
  if (s.rfind("anchor", 0) == 0) s = s.substr(6);
  if (s == "r") return AnchorKind::kR;
  if (s == "m") return AnchorKind::kM;
  if (s == "e") return AnchorKind::kE;
  Fail(ErrorCode::kUnknownName,
       "unknown anchor '" + name + "'; valid anchors: R, M, E");
}

AnchorSpec MakeAnchorSpec(AnchorKind kind, double width_multiplier) {
  if (!(width_multiplier > 0)) {
    Fail(ErrorCode::kInvalidArgument, "width_multiplier must be positive");
  }
  AnchorSpec spec;
  spec.kind = kind;
  spec.width_multiplier = width_multiplier;
  spec.stem_width = Scaled(8, width_multiplier);
  for (int i = 0; i < 3; ++i) {
    spec.widths[i] = Scaled(spec.widths[i], width_multiplier);
  }
  switch (kind) {
    case AnchorKind::kR:
      break;
    case AnchorKind::kM:
      spec.expansion = 4;
      spec.head_width = Scaled(32, width_multiplier);
      break;
    case AnchorKind::kE:
      spec.expansion = 6;
      spec.head_width = Scaled(32, width_multiplier);
      spec.layer_after_projection = true;
      break;
  }
  return spec;
}

std::vector<int> LayerSiteChannels(const AnchorSpec& spec) {
  std::vector<int> sites;
  if (spec.kind == AnchorKind::kR) {
    int in = spec.stem_width;
    for (int b = 0; b < 3; ++b) {
      sites.push_back(in);
      sites.push_back(spec.widths[b]);
      in = spec.widths[b];
    }
    sites.push_back(in);
    return sites;
  }
  sites.push_back(spec.stem_width);
  int in = spec.stem_width;
  for (int b = 0; b < 3; ++b) {
    const int expanded = in * spec.expansion;
    sites.push_back(expanded);
    sites.push_back(expanded);
    if (spec.layer_after_projection) sites.push_back(spec.widths[b]);
    in = spec.widths[b];
  }
  sites.push_back(spec.head_width);
  return sites;
}

// Runs the architecture once per call. Parameters and layer sites are
// created the first time the walk reaches them, so the same code both
// builds and evaluates the network.
class NetworkWalker {
 public:
  NetworkWalker(AnchorModel& model, ad::Tape& tape, EvalMode mode,
                std::vector<ad::Var>* param_vars, std::mt19937_64* init_rng)
      : model_(model), tape_(tape), mode_(mode), param_vars_(param_vars),
        init_rng_(init_rng) {}

  ad::Var Run(ad::Var x) {
    const AnchorSpec& spec = model_.spec_;
    ad::Var h = Conv(x, 3, spec.stem_width, 1, 1);
    if (spec.kind == AnchorKind::kR) {
      for (int b = 0; b < 3; ++b) {
        const int in = Channels(h);
        const int out = spec.widths[b];
        const int stride = spec.strides[b];
        ad::Var t = Layer(h);
        t = Conv(t, 3, out, stride, 1);
        t = Layer(t);
        t = Conv(t, 3, out, 1, 1);
        const ad::Var skip =
            (in == out && stride == 1) ? h : Conv(h, 1, out, stride, 1);
        h = ad::Add(tape_, t, skip);
      }
      h = Layer(h);
    } else {
      h = Layer(h);
      for (int b = 0; b < 3; ++b) {
        const int in = Channels(h);
        const int out = spec.widths[b];
        const int stride = spec.strides[b];
        const int expanded = in * spec.expansion;
        ad::Var t = Layer(Conv(h, 1, expanded, 1, 1));
        t = Layer(Conv(t, 3, expanded, stride, expanded));
        t = Conv(t, 1, out, 1, 1);
        if (spec.layer_after_projection) t = Layer(t);
        if (in == out && stride == 1) t = ad::Add(tape_, t, h);
        h = t;
      }
      h = Layer(Conv(h, 1, spec.head_width, 1, 1));
    }
    return Dense(ad::GlobalAvgPool(tape_, h), spec.num_classes);
  }

 private:
  int Channels(ad::Var v) const { return tape_.value(v).channels(); }

  Tensor HeNormal(const Shape& shape, int fan_in) {
    Tensor t(shape);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : t.data()) v = normal(*init_rng_);
    return t;
  }

  ad::Var Param(const std::function<Tensor()>& make) {
    if (cursor_ == model_.params_.size()) {
      if (init_rng_ == nullptr) {
        Fail(ErrorCode::kInternal, "network walk outgrew its parameters");
      }
      model_.params_.push_back(make());
    }
    const Tensor& value = model_.params_[cursor_++];
    if (param_vars_ != nullptr) {
      const ad::Var v = tape_.Variable(value);
      param_vars_->push_back(v);
      return v;
    }
    return tape_.Constant(value);
  }

  ad::Var Conv(ad::Var x, int k, int out, int stride, int groups) {
    const int in = Channels(x);
    const ad::Var w = Param(
        [&] { return HeNormal(Shape{k, k, in / groups, out}, k * k * in / groups); });
    return ad::Conv2D(tape_, x, w, stride, Padding::kSame, groups);
  }

  ad::Var Dense(ad::Var x, int out) {
    const int in = Channels(x);
    const ad::Var w = Param([&] { return HeNormal(Shape{1, 1, in, out}, in); });
    const ad::Var b = Param([&] { return Tensor(Shape{1, 1, 1, out}); });
    return ad::Dense(tape_, x, w, b);
  }

  ad::Var Layer(ad::Var x) {
    const int c = Channels(x);
    if (site_ == model_.sites_.size()) {
      model_.sites_.push_back(
          EmaStore::ForGraph(model_.layer_, c, model_.ema_momentum_));
    }
    const Shape shape{1, 1, 1, c};
    LayerVars vars;
    vars.gamma = Param([&] { return Tensor(shape, 1.0); });
    vars.beta = Param([&] { return Tensor(shape, 0.0); });
    vars.v0 = Param([&] { return Tensor(shape, 0.0); });
    vars.v1 = Param([&] { return Tensor(shape, 1.0); });
    return ForwardOnTape(tape_, model_.layer_, x, vars, model_.sites_[site_++],
                         mode_);
  }

  AnchorModel& model_;
  ad::Tape& tape_;
  EvalMode mode_;
  std::vector<ad::Var>* param_vars_;
  std::mt19937_64* init_rng_;
  std::size_t cursor_ = 0;
  std::size_t site_ = 0;
};

AnchorModel::AnchorModel(const AnchorSpec& spec, const LayerGraph& layer,
                         std::uint64_t init_seed, double ema_momentum)
    : spec_(spec), layer_(layer), ema_momentum_(ema_momentum) {
  const ValidationReport report = Validate(layer);
  if (!report.ok) {
    Fail(ErrorCode::kInvalidArgument, "invalid layer graph: " + report.reasons.front());
  }
  for (int channels : LayerSiteChannels(spec)) {
    for (const GraphNode& node : layer.nodes) {
      if (node.kind == GraphNode::Kind::kOp && node.op.is_moment() &&
          node.op.index.axes == Axes::kWHCg && channels % node.op.index.groups != 0) {
        Fail(ErrorCode::kGroupDivisibility,
             std::to_string(node.op.index.groups) + " groups do not divide a " +
                 std::to_string(channels) + "-channel layer site of anchor " +
                 AnchorName(spec.kind));
      }
    }
  }
  // Build pass on a small dummy batch; its statistics are discarded.
  std::mt19937_64 rng(init_seed);
  ad::Tape tape;
  NetworkWalker walker(*this, tape, EvalMode::kTraining, nullptr, &rng);
  walker.Run(tape.Constant(Tensor(Shape{1, 4, 4, 3})));
  const std::vector<int> channels = LayerSiteChannels(spec_);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    sites_[i] = EmaStore::ForGraph(layer_, channels.at(i), ema_momentum_);
  }
}

std::size_t AnchorModel::parameter_count() const {
  std::size_t total = 0;
  for (const Tensor& p : params_) total += p.size();
  return total;
}

ad::Var AnchorModel::Logits(ad::Tape& tape, const Tensor& images, EvalMode mode,
                            std::vector<ad::Var>* param_vars) {
  if (param_vars != nullptr) param_vars->clear();
  NetworkWalker walker(*this, tape, mode, param_vars, nullptr);
  return walker.Run(tape.Constant(images));
}

double AnchorModel::LossAndGradients(const Tensor& images,
                                     std::span<const int> labels,
                                     std::vector<Tensor>& grads) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  const ad::Var logits = Logits(tape, images, EvalMode::kTraining, &vars);
  const ad::Var loss = ad::SoftmaxCrossEntropy(
      tape, logits, std::vector<int>(labels.begin(), labels.end()));
  const double value = tape.value(loss)[0];
  tape.Backward(loss);
  grads.clear();
  grads.reserve(vars.size());
  for (ad::Var v : vars) grads.push_back(tape.grad(v));
  return value;
}

Tensor AnchorModel::PredictLogits(const Tensor& images) {
  ad::Tape tape;
  return tape.value(Logits(tape, images, EvalMode::kInference));
}

std::vector<double> AnchorModel::FlatParameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Tensor& p : params_) flat.insert(flat.end(), p.data().begin(), p.data().end());
  return flat;
}

void AnchorModel::SetFlatParameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    Fail(ErrorCode::kShapeMismatch, "flat parameter vector has " +
                                        std::to_string(flat.size()) +
                                        " entries, model has " +
                                        std::to_string(parameter_count()));
  }
  std::size_t offset = 0;
  for (Tensor& p : params_) {
    std::copy_n(flat.begin() + offset, p.size(), p.data().begin());
    offset += p.size();
  }
}

}  // namespace evonorm
