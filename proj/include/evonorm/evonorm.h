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


/* C interface to the EvoNorm search library. Objects are opaque handles
 * owned by the caller and released with the matching *_free function.
 * Functions return an evn_status; on failure evn_last_error() describes
 * the problem. Strings returned through char** out-parameters are
 * NUL-terminated, heap-allocated and released with evn_string_free. */

#ifndef EVONORM_EVONORM_H_
#define EVONORM_EVONORM_H_

#include <stdint.h>

#if defined(_WIN32)
#define EVN_API __declspec(dllexport)
#else
#define EVN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evn_status {
  EVN_OK = 0,
  EVN_ERR_INVALID_ARGUMENT = 1,
  EVN_ERR_SHAPE_MISMATCH = 2,
  EVN_ERR_GROUP_DIVISIBILITY = 3,
  EVN_ERR_PARSE = 4,
  EVN_ERR_UNKNOWN_NAME = 5,
  EVN_ERR_CONFIG = 6,
  EVN_ERR_IO = 7,
  EVN_ERR_INTERNAL = 8
} evn_status;

typedef struct evn_config evn_config;
typedef struct evn_graph evn_graph;

EVN_API const char* evn_version(void);
EVN_API const char* evn_status_name(evn_status status);
/* Message of the last failure on the calling thread; "" if none. */
EVN_API const char* evn_last_error(void);
EVN_API void evn_string_free(char* s);

/* Run configuration. Presets: "desk", "micro". */
EVN_API evn_status evn_config_new(const char* preset, evn_config** out);
EVN_API void evn_config_free(evn_config* config);
/* Overlays a JSON object; unknown keys are EVN_ERR_CONFIG. */
EVN_API evn_status evn_config_merge_json(evn_config* config, const char* json);
EVN_API evn_status evn_config_to_json(const evn_config* config, char** out_json);
/* Range checks; EVN_ERR_CONFIG with the first violation. */
EVN_API evn_status evn_config_check(const evn_config* config);
EVN_API evn_status evn_preset_names(char** out_json);

/* Layer graphs. */
EVN_API evn_status evn_zoo_names(char** out_json);
/* {"name", "expression", "description", "graph"} */
EVN_API evn_status evn_zoo_describe(const char* name, int groups, char** out_json);
EVN_API evn_status evn_graph_from_zoo(const char* name, int groups, evn_graph** out);
EVN_API evn_status evn_graph_from_json(const char* json, evn_graph** out);
/* Zoo name or path to a graph JSON file. */
EVN_API evn_status evn_graph_resolve(const char* spec, int groups, evn_graph** out);
EVN_API void evn_graph_free(evn_graph* graph);
EVN_API evn_status evn_graph_to_json(const evn_graph* graph, char** out_json);
EVN_API evn_status evn_graph_render(const evn_graph* graph, char** out_text);
/* {"ok", "reasons", "batch_dependent", "depends_on_x"} */
EVN_API evn_status evn_graph_validate(const evn_graph* graph, char** out_json);

/* Commands. Each writes its files and manifest.json into the configured
 * output directory and returns a JSON summary. */
EVN_API evn_status evn_run_search(const evn_config* config, int random_baseline,
                                  char** out_summary);
EVN_API evn_status evn_run_survey(const evn_config* config, int count,
                                  char** out_summary);
/* `anchors` is a comma-separated list such as "R,M"; NULL or "" uses the
 * configured anchors. */
EVN_API evn_status evn_run_eval(const evn_config* config, const char* layer,
                                const char* anchors, char** out_summary);
EVN_API evn_status evn_run_stress(const evn_config* config, const char* layer,
                                  const char* anchor, char** out_summary);
EVN_API evn_status evn_run_rank(const evn_config* config, const char* candidates_path,
                                char** out_summary);
/* Writes no files. *out_all_passed is 1 when every case passed. */
EVN_API evn_status evn_run_gradcheck(double tolerance, uint64_t seed, int* out_all_passed,
                                     char** out_summary);

#ifdef __cplusplus
}
#endif

#endif /* EVONORM_EVONORM_H_ */
