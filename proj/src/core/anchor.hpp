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


// Small CNNs that host a candidate layer at every normalization-activation
// site. R is a pre-activation residual net, M uses inverted bottlenecks, and
// E is M with a wider expansion and an extra layer after each projection.

#ifndef EVONORM_CORE_ANCHOR_HPP_
#define EVONORM_CORE_ANCHOR_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "graph.hpp"
#include "layer.hpp"
#include "tensor.hpp"

namespace evonorm {

enum class AnchorKind { kR, kM, kE };

const char* AnchorName(AnchorKind kind);  // "R", "M", "E"
// Accepts "r", "anchor_r", "R" and so on.
AnchorKind ParseAnchor(const std::string& name);

struct AnchorSpec {
  AnchorKind kind = AnchorKind::kR;
  double width_multiplier = 1.0;
  int stem_width = 8;
  std::array<int, 3> widths{8, 16, 16};
  std::array<int, 3> strides{1, 2, 1};
  int expansion = 1;   // M and E only
  int head_width = 0;  // M and E only
  bool layer_after_projection = false;
  int num_classes = 10;
};

// Base widths (8, 16, 16), stem 8, M/E head 32, all scaled by
// `width_multiplier` and rounded.
AnchorSpec MakeAnchorSpec(AnchorKind kind, double width_multiplier = 1.0);

// Channel counts seen by the custom-layer sites, in site order.
std::vector<int> LayerSiteChannels(const AnchorSpec& spec);

class AnchorModel {
 public:
  // Allocates He-initialized weights from `init_seed`. Throws
  // Error(kGroupDivisibility) when a grouped moment of `layer` does not
  // divide some site's channel count.
  AnchorModel(const AnchorSpec& spec, const LayerGraph& layer,
              std::uint64_t init_seed, double ema_momentum = kDefaultEmaMomentum);

  const AnchorSpec& spec() const { return spec_; }
  const LayerGraph& layer() const { return layer_; }
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  int num_layer_sites() const { return static_cast<int>(sites_.size()); }
  const EmaStore& site_ema(int site) const { return sites_.at(site); }

  // Records the network on `tape`. When `param_vars` is given, parameters
  // enter as gradient-receiving leaves and are returned in parameter order;
  // otherwise they are constants.
  ad::Var Logits(ad::Tape& tape, const Tensor& images, EvalMode mode,
                 std::vector<ad::Var>* param_vars = nullptr);

  // Mean cross-entropy and its gradient per parameter (training mode).
  double LossAndGradients(const Tensor& images, std::span<const int> labels,
                          std::vector<Tensor>& grads);

  Tensor PredictLogits(const Tensor& images);

  std::vector<double> FlatParameters() const;
  void SetFlatParameters(std::span<const double> flat);

 private:
  friend class NetworkWalker;

  AnchorSpec spec_;
  LayerGraph layer_;
  double ema_momentum_;
  std::vector<Tensor> params_;
  std::vector<EmaStore> sites_;
};

}  // namespace evonorm

#endif  // EVONORM_CORE_ANCHOR_HPP_
