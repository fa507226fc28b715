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


// Top-level commands. Each writes its files plus manifest.json into the
// configured output directory and returns a JSON summary.

#ifndef EVONORM_CORE_RUNNER_HPP_
#define EVONORM_CORE_RUNNER_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "gradcheck.hpp"

namespace evonorm {

std::string BuildIdentifier();

// A zoo name, or a path to a graph JSON file. Unknown names throw
// Error(kUnknownName) listing the zoo.
LayerGraph ResolveLayer(const std::string& spec, int groups);

nlohmann::json RunSearch(const RunConfig& config, bool random_baseline);
nlohmann::json RunSurvey(const RunConfig& config, int count);
nlohmann::json RunEval(const RunConfig& config, const std::string& layer,
                       const std::vector<AnchorKind>& anchors);
nlohmann::json RunStress(const RunConfig& config, const std::string& layer,
                         AnchorKind anchor);
nlohmann::json RunRank(const RunConfig& config, const std::string& candidates_path);
// No files; the summary lists every case.
nlohmann::json RunGradcheck(const GradcheckOptions& options);

}  // namespace evonorm

#endif  // EVONORM_CORE_RUNNER_HPP_
