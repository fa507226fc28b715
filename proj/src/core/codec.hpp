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

// JSON forms of graphs for logs and the zoo; the string wrappers in
// graph.hpp sit on top of these.

#ifndef EVONORM_CORE_CODEC_HPP_
#define EVONORM_CORE_CODEC_HPP_

#include <json.hpp>

#include "graph.hpp"

namespace evonorm {

nlohmann::json GraphToJson(const LayerGraph& graph);
// Throws Error(kParse) naming the offending field.
LayerGraph GraphFromJson(const nlohmann::json& doc);

}  // namespace evonorm

#endif  // EVONORM_CORE_CODEC_HPP_
