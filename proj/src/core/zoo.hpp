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


// Named reference layers: the EvoNorms, the normalization baselines, the
// structural ablations of B0 and the two top-10 candidate lists.

#ifndef EVONORM_CORE_ZOO_HPP_
#define EVONORM_CORE_ZOO_HPP_

#include <string>
#include <vector>

#include "graph.hpp"
#include "layer.hpp"

namespace evonorm {

inline constexpr int kZooGroups = 8;

struct ZooEntry {
  std::string name;
  LayerGraph graph;
  int groups = kZooGroups;  // group count used by (w,h,c/g) moments
  std::string description;

  LayerParams DefaultParams(int channels) const {
    return LayerParams::Default(channels);
  }
};

const std::vector<std::string>& ZooNames();
bool IsZooName(const std::string& name);
// Throws Error(kUnknownName) listing the valid names.
ZooEntry Zoo(const std::string& name, int groups = kZooGroups);

}  // namespace evonorm

#endif  // EVONORM_CORE_ZOO_HPP_
