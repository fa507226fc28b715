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


// On-disk search logs: candidates.jsonl lines, progress and rejection CSVs,
// and the top-10 summary.

#ifndef EVONORM_CORE_SEARCHLOG_HPP_
#define EVONORM_CORE_SEARCHLOG_HPP_

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anchor.hpp"
#include "evolution.hpp"

namespace evonorm {

// Non-finite numbers become null.
nlohmann::json CandidateToJson(const Candidate& candidate);
Candidate CandidateFromJson(const nlohmann::json& j);

void WriteCandidatesJsonl(std::ostream& out, const SearchLog& log);
// Throws Error(kParse) with the 1-based line number on malformed lines.
std::vector<Candidate> ReadCandidatesJsonl(const std::string& path);

void WriteProgressCsv(std::ostream& out, const SearchLog& log,
                      const std::vector<AnchorKind>& anchors);
void WriteRejectionCsv(std::ostream& out, const SearchLog& log);
nlohmann::json Top10Json(const SearchLog& log, const std::vector<AnchorKind>& anchors);

// Writes `text` to `path`, creating parent directories; Error(kIo) on
// failure.
void WriteTextFile(const std::string& path, const std::string& text);

// Shortest round-trip decimal form, "nan"/"inf"/"-inf" otherwise.
std::string FormatDouble(double v);

}  // namespace evonorm

#endif  // EVONORM_CORE_SEARCHLOG_HPP_
