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


// evonorm: command-line front end over the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "evonorm/evonorm.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct ConfigDeleter {
  void operator()(evn_config* c) const { evn_config_free(c); }
};
using ConfigPtr = std::unique_ptr<evn_config, ConfigDeleter>;

// A failed C call, carrying the status for the exit-code mapping.
struct CallError {
  evn_status status;
  std::string message;
};

void Check(evn_status status) {
  if (status != EVN_OK) throw CallError{status, evn_last_error()};
}

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  evn_string_free(s);
  return out;
}

int ExitCodeFor(evn_status status) {
  switch (status) {
    case EVN_OK: return kExitOk;
    case EVN_ERR_INVALID_ARGUMENT:
    case EVN_ERR_GROUP_DIVISIBILITY:
    case EVN_ERR_PARSE:
    case EVN_ERR_UNKNOWN_NAME:
    case EVN_ERR_CONFIG:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

// Flags shared by every command that reads a run configuration. Only flags
// given on the command line end up in the override patch.
struct RunFlags {
  std::string config_path;
  std::string preset;
  std::string output_dir;
  std::string mode;
  std::string criterion;
  std::string anchors;
  std::uint64_t seed = 0;
  int workers = 0;
  int budget = 0;
  int window = 0;
  int steps = 0;
  int groups = 0;
  double tournament_fraction = 0.0;
  double width = 0.0;
  bool no_rejection = false;

  std::vector<std::pair<std::string, CLI::Option*>> given;

  void Attach(CLI::App* app, bool search_flags) {
    app->add_option("--config", config_path, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    given.emplace_back("preset", app->add_option("--preset", preset,
                                                 "Base preset: desk (default) or micro"));
    given.emplace_back("output_dir", app->add_option("-o,--output-dir", output_dir,
                                                     "Directory for logs and manifest [desk: evonorm_run]"));
    given.emplace_back("seed", app->add_option("--seed", seed, "Master seed [desk: 0]"));
    given.emplace_back("workers",
                       app->add_option("--workers", workers,
                                       "Worker threads; results do not depend on it "
                                       "[default: $EVONORM_WORKERS, else 1]"));
    given.emplace_back("mode", app->add_option("--mode", mode,
                                               "batch (B series) or sample (S series, batch "
                                               "independent, cosine schedule) [desk: batch]"));
    given.emplace_back("train.steps", app->add_option("--steps", steps,
                                                      "Full proxy training steps in batch mode "
                                                      "[desk: 1000; sample mode uses sample_steps, desk: 2000]"));
    given.emplace_back("groups", app->add_option("--groups", groups,
                                                 "Group count of (w,h,c/g) moments [reference: 8]"));
    given.emplace_back("width_multiplier", app->add_option("--width", width,
                                                           "Anchor width multiplier [desk: 1]"));
    given.emplace_back("anchors", app->add_option("--anchors", anchors,
                                                  "Comma-separated anchors from R,M,E [desk: R,M,E]"));
    if (search_flags) {
      given.emplace_back("evolution.budget",
                         app->add_option("--budget", budget,
                                         "Candidates attempted, rejected ones included [desk: 300]"));
      given.emplace_back("evolution.criterion",
                         app->add_option("--criterion", criterion,
                                         "Tournament criterion: pareto or average [reference: pareto]"));
      given.emplace_back("evolution.window",
                         app->add_option("--window", window,
                                         "Population window [reference: 2500]"));
      given.emplace_back("evolution.tournament_fraction",
                         app->add_option("--tournament-fraction", tournament_fraction,
                                         "Tournament size as a fraction of the window [reference: 0.05]"));
      given.emplace_back("rejection", app->add_flag("--no-rejection", no_rejection,
                                                    "Skip the quality and stability tests"));
    }
  }

  json Patch() const {
    json patch = json::object();
    for (const auto& [key, option] : given) {
      if (option->count() == 0) continue;
      json value;
      if (key == "preset") value = preset;
      else if (key == "output_dir") value = output_dir;
      else if (key == "seed") value = seed;
      else if (key == "workers") value = workers;
      else if (key == "mode") value = mode;
      else if (key == "train.steps") value = steps;
      else if (key == "groups") value = groups;
      else if (key == "width_multiplier") value = width;
      else if (key == "evolution.budget") value = budget;
      else if (key == "evolution.criterion") value = criterion;
      else if (key == "evolution.window") value = window;
      else if (key == "evolution.tournament_fraction") value = tournament_fraction;
      else if (key == "rejection") value = !no_rejection;
      else if (key == "anchors") {
        value = json::array();
        std::stringstream in(anchors);
        std::string item;
        while (std::getline(in, item, ',')) {
          if (!item.empty()) value.push_back(item);
        }
      }
      const auto dot = key.find('.');
      if (dot == std::string::npos) {
        patch[key] = value;
      } else {
        patch[key.substr(0, dot)][key.substr(dot + 1)] = value;
      }
    }
    return patch;
  }

  // Preset, then the config file, then flags.
  ConfigPtr Resolve() const {
    json patch = Patch();
    evn_config* raw = nullptr;
    Check(evn_config_new(patch.contains("preset") ? patch["preset"].get<std::string>().c_str()
                                                  : "desk",
                         &raw));
    ConfigPtr config(raw);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream text;
      text << in.rdbuf();
      if (!in) throw CallError{EVN_ERR_CONFIG, "cannot read " + config_path};
      Check(evn_config_merge_json(config.get(), text.str().c_str()));
    }
    patch.erase("preset");
    Check(evn_config_merge_json(config.get(), patch.dump().c_str()));
    Check(evn_config_check(config.get()));
    return config;
  }
};

void PrintJson(const std::string& text) { std::cout << text << '\n'; }

int Run(int argc, char** argv) {
  CLI::App app{"Search, evaluate and inspect normalization-activation layers", "evonorm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(evn_version()));

  RunFlags search_flags, random_flags, survey_flags, eval_flags, stress_flags, rank_flags,
      config_flags;

  CLI::App* search = app.add_subcommand("search", "Regularized evolution; writes candidates.jsonl, "
                                                  "progress.csv, rejection.csv, top10.json");
  search_flags.Attach(search, true);

  CLI::App* random_search =
      app.add_subcommand("random-search", "Random-search baseline with the same outputs as search");
  random_flags.Attach(random_search, true);

  int survey_count = 0;
  CLI::App* survey = app.add_subcommand(
      "survey", "Fully train N random graphs on every anchor; writes survey.csv and "
                "survey_hist_<anchor>.csv");
  survey->add_option("count", survey_count, "Number of random graphs")->required()->check(
      CLI::NonNegativeNumber);
  survey_flags.Attach(survey, false);

  std::string eval_layer, eval_anchor;
  CLI::App* eval = app.add_subcommand("eval", "Train anchors hosting one layer; writes eval.json");
  eval->add_option("--layer", eval_layer, "Zoo name or graph JSON file")->required();
  eval->add_option("--anchor", eval_anchor, "Anchor name (R, M or E); default: configured anchors");
  eval_flags.Attach(eval, false);

  std::string stress_layer, stress_anchor = "R";
  CLI::App* stress = app.add_subcommand(
      "stress", "Gradient-norm ascent on one layer; writes stress_trace.csv");
  stress->add_option("--layer", stress_layer, "Zoo name or graph JSON file")->required();
  stress->add_option("--anchor", stress_anchor, "Anchor name [default: R]");
  stress_flags.Attach(stress, false);

  std::string rank_input;
  CLI::App* rank = app.add_subcommand(
      "rank", "Retrain the top search candidates on enlarged anchors; writes rerank.json");
  rank->add_option("--in", rank_input, "candidates.jsonl from a search")->required()->check(
      CLI::ExistingFile);
  rank_flags.Attach(rank, false);

  CLI::App* zoo = app.add_subcommand("zoo", "Inspect the built-in layers");
  zoo->require_subcommand(1);
  CLI::App* zoo_list = zoo->add_subcommand("list", "Print every zoo name and expression");
  std::string zoo_name;
  int zoo_groups = 8;
  CLI::App* zoo_show = zoo->add_subcommand("show", "Print the expression of one layer");
  zoo_show->add_option("name", zoo_name, "Zoo name")->required();
  zoo_show->add_option("--groups", zoo_groups, "Group count of (w,h,c/g) moments [reference: 8]");
  bool zoo_json = false;
  zoo_show->add_flag("--json", zoo_json, "Print name, expression, description and graph JSON");

  double gc_tolerance = 1e-6;
  std::uint64_t gc_seed = 0;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference check of every primitive and zoo layer");
  gradcheck->add_option("--tolerance", gc_tolerance, "Relative error bound [default: 1e-6]");
  gradcheck->add_option("--seed", gc_seed, "Sampling seed [default: 0]");

  CLI::App* config_cmd = app.add_subcommand("config", "Print the resolved configuration");
  config_flags.Attach(config_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "evonorm: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    char* out = nullptr;
    if (*search || *random_search) {
      const bool random = static_cast<bool>(*random_search);
      ConfigPtr config = (random ? random_flags : search_flags).Resolve();
      Check(evn_run_search(config.get(), random ? 1 : 0, &out));
      PrintJson(TakeString(out));
    } else if (*survey) {
      ConfigPtr config = survey_flags.Resolve();
      Check(evn_run_survey(config.get(), survey_count, &out));
      PrintJson(TakeString(out));
    } else if (*eval) {
      ConfigPtr config = eval_flags.Resolve();
      Check(evn_run_eval(config.get(), eval_layer.c_str(), eval_anchor.c_str(), &out));
      PrintJson(TakeString(out));
    } else if (*stress) {
      ConfigPtr config = stress_flags.Resolve();
      Check(evn_run_stress(config.get(), stress_layer.c_str(), stress_anchor.c_str(), &out));
      PrintJson(TakeString(out));
    } else if (*rank) {
      ConfigPtr config = rank_flags.Resolve();
      Check(evn_run_rank(config.get(), rank_input.c_str(), &out));
      PrintJson(TakeString(out));
    } else if (*zoo_list) {
      Check(evn_zoo_names(&out));
      for (const json& name : json::parse(TakeString(out))) {
        char* described = nullptr;
        Check(evn_zoo_describe(name.get<std::string>().c_str(), 8, &described));
        const json d = json::parse(TakeString(described));
        std::cout << d["name"].get<std::string>() << '\t' << d["expression"].get<std::string>()
                  << '\n';
      }
    } else if (*zoo_show) {
      Check(evn_zoo_describe(zoo_name.c_str(), zoo_groups, &out));
      const json d = json::parse(TakeString(out));
      if (zoo_json) {
        PrintJson(d.dump(2));
      } else {
        std::cout << d["expression"].get<std::string>() << '\n';
      }
    } else if (*gradcheck) {
      int all_passed = 0;
      Check(evn_run_gradcheck(gc_tolerance, gc_seed, &all_passed, &out));
      PrintJson(TakeString(out));
      return all_passed ? kExitOk : kExitFailure;
    } else if (*config_cmd) {
      ConfigPtr config = config_flags.Resolve();
      Check(evn_config_to_json(config.get(), &out));
      PrintJson(TakeString(out));
    }
  } catch (const CallError& e) {
    std::cerr << "evonorm: " << evn_status_name(e.status) << ": " << e.message << '\n';
    return ExitCodeFor(e.status);
  } catch (const std::exception& e) {
    std::cerr << "evonorm: internal: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return Run(argc, argv); }
