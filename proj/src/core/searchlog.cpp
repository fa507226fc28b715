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


#include "searchlog.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "codec.hpp"
#include "error.hpp"

namespace evonorm {

using nlohmann::json;

namespace {

json Num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double NumOr(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<double>();
}

}  // namespace

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json CandidateToJson(const Candidate& c) {
  json scores = json::array();
  for (double s : c.scores) scores.push_back(Num(s));
  const RejectionVerdict& v = c.verdict;
  json j;
  j["id"] = c.id;
  j["origin"] = OriginName(c.origin);
  j["parent"] = c.parent ? json(*c.parent) : json(nullptr);
  j["seed"] = c.seed;
  j["status"] = StatusName(c.status);
  j["expression"] = RenderExpression(c.graph);
  j["graph"] = GraphToJson(c.graph);
  j["quality_accuracy"] = Num(v.quality_accuracy);
  j["stability_run"] = v.stability_run;
  j["peak_grad_norm"] = v.stability_run ? Num(v.peak_grad_norm) : json(nullptr);
  j["steps_to_blowup"] = v.steps_to_blowup ? json(*v.steps_to_blowup) : json(nullptr);
  j["scores"] = scores;
  j["mean_score"] = c.scores.empty() ? json(nullptr) : Num(c.MeanScore());
  j["cost"] = c.cost;
  return j;
}

Candidate CandidateFromJson(const json& j) {
  Candidate c;
  try {
    c.id = j.at("id").get<int>();
    c.origin = ParseOrigin(j.at("origin").get<std::string>());
    if (!j.at("parent").is_null()) c.parent = j.at("parent").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.status = ParseStatus(j.at("status").get<std::string>());
    c.graph = GraphFromJson(j.at("graph"));
    c.verdict.quality_accuracy = NumOr(j, "quality_accuracy", 0.0);
    c.verdict.stability_run = j.value("stability_run", false);
    c.verdict.peak_grad_norm =
        NumOr(j, "peak_grad_norm", c.verdict.stability_run ? INFINITY : 0.0);
    if (j.contains("steps_to_blowup") && !j.at("steps_to_blowup").is_null()) {
      c.verdict.steps_to_blowup = j.at("steps_to_blowup").get<int>();
    }
    for (const json& s : j.at("scores")) c.scores.push_back(s.is_null() ? NAN : s.get<double>());
    c.cost = NumOr(j, "cost", 0.0);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed candidate record: ") + e.what());
  }
  c.verdict.quality_passed = c.status == CandidateStatus::kRejectedStability ||
                             c.status == CandidateStatus::kEvaluated;
  c.verdict.stability_passed = c.status == CandidateStatus::kEvaluated;
  c.verdict.passed = c.verdict.stability_passed;
  return c;
}

void WriteCandidatesJsonl(std::ostream& out, const SearchLog& log) {
  for (const Candidate& c : log.candidates) out << CandidateToJson(c).dump() << '\n';
}

std::vector<Candidate> ReadCandidatesJsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<Candidate> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(CandidateFromJson(json::parse(line)));
    } catch (const std::exception& e) {
      Fail(ErrorCode::kParse, path + " line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void WriteProgressCsv(std::ostream& out, const SearchLog& log,
                      const std::vector<AnchorKind>& anchors) {
  out << "attempted,survivors,cost,best_fitness,top10_fitness";
  for (AnchorKind k : anchors) out << ",best_" << AnchorName(k);
  for (AnchorKind k : anchors) out << ",top10_" << AnchorName(k);
  out << '\n';
  for (const ProgressRow& row : log.progress) {
    out << row.attempted << ',' << row.survivors << ',' << FormatDouble(row.cost) << ','
        << FormatDouble(row.best_fitness) << ',' << FormatDouble(row.top10_fitness);
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      out << ',' << (k < row.best.size() ? FormatDouble(row.best[k]) : "");
    }
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      out << ',' << (k < row.top10_mean.size() ? FormatDouble(row.top10_mean[k]) : "");
    }
    out << '\n';
  }
}

void WriteRejectionCsv(std::ostream& out, const SearchLog& log) {
  out << "id,status,quality_accuracy,stability_run,peak_grad_norm,steps_to_blowup,cost\n";
  for (const Candidate& c : log.candidates) {
    const RejectionVerdict& v = c.verdict;
    out << c.id << ',' << StatusName(c.status) << ',' << FormatDouble(v.quality_accuracy)
        << ',' << (v.stability_run ? 1 : 0) << ','
        << (v.stability_run ? FormatDouble(v.peak_grad_norm) : "") << ','
        << (v.steps_to_blowup ? std::to_string(*v.steps_to_blowup) : "") << ','
        << FormatDouble(c.cost) << '\n';
  }
}

json Top10Json(const SearchLog& log, const std::vector<AnchorKind>& anchors) {
  json list = json::array();
  int rank = 1;
  for (const Candidate* c : TopCandidates(log, 10)) {
    json scores = json::object();
    for (std::size_t k = 0; k < anchors.size() && k < c->scores.size(); ++k) {
      scores[AnchorName(anchors[k])] = Num(c->scores[k]);
    }
    list.push_back({{"rank", rank++},
                    {"id", c->id},
                    {"expression", RenderExpression(c->graph)},
                    {"graph", GraphToJson(c->graph)},
                    {"scores", scores},
                    {"mean_score", Num(c->MeanScore())}});
  }
  return {{"top10_mean_fitness", Top10MeanFitness(log)}, {"candidates", list}};
}

void WriteTextFile(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  out << text;
  out.close();
  if (!out) Fail(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace evonorm
