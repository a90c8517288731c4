/*
 * Copyright (c) 2026 The Apprentice Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef APPRENTICE_APPRENTICE_H
#define APPRENTICE_APPRENTICE_H

/*
 * C interface to the apprentice tutoring engine.
 *
 * Every call returns an apprentice_status. On failure the message is
 * available from apprentice_last_error() on the same thread until the next
 * call. Strings handed out through char** parameters belong to the caller
 * and must be released with apprentice_string_free(). All JSON is UTF-8.
 */

#include <stddef.h>

#if defined(_WIN32)
#define APPRENTICE_API __declspec(dllexport)
#else
#define APPRENTICE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum apprentice_status {
    APPRENTICE_OK = 0,
    APPRENTICE_E_INVALID_ARGUMENT = 1,
    APPRENTICE_E_VALIDATION = 2,
    APPRENTICE_E_IO = 3,
    APPRENTICE_E_PARSE = 4,
    APPRENTICE_E_GATEWAY = 5,
    APPRENTICE_E_MOCK_EXHAUSTED = 6,
    APPRENTICE_E_COVERAGE = 7,
    APPRENTICE_E_UNRESOLVED_ANCHOR = 8,
    APPRENTICE_E_UNRESOLVED_PARAMETER = 9,
    APPRENTICE_E_NUMERIC_DEGENERATE = 10,
    APPRENTICE_E_PHASE = 11,
    APPRENTICE_E_NOT_FOUND = 12,
    APPRENTICE_E_INTERNAL = 13
} apprentice_status;

typedef struct apprentice_config apprentice_config;
typedef struct apprentice_gateway apprentice_gateway;
typedef struct apprentice_service apprentice_service;

APPRENTICE_API const char* apprentice_version(void);
APPRENTICE_API const char* apprentice_status_name(apprentice_status status);
/* Message of the last failure on this thread; "" when the last call succeeded. */
APPRENTICE_API const char* apprentice_last_error(void);
APPRENTICE_API void apprentice_string_free(char* s);

/* Configuration. Relative sources resolve against the file's directory, or
 * against base_dir for parsed text (NULL: current directory). */
APPRENTICE_API apprentice_status apprentice_config_load(const char* path, apprentice_config** out);
APPRENTICE_API apprentice_status apprentice_config_parse(const char* json, const char* base_dir,
                                                         apprentice_config** out);
APPRENTICE_API apprentice_status apprentice_config_to_json(const apprentice_config* config, char** out_json);
/* offline != 0 forbids http(s) sources for every stage using this config. */
APPRENTICE_API apprentice_status apprentice_config_set_offline(apprentice_config* config, int offline);
APPRENTICE_API void apprentice_config_free(apprentice_config* config);

/* Gateways. A mock replays a script of {match, reply} entries; the config
 * variant honours the config's backend unless mock_script_path is given. */
APPRENTICE_API apprentice_status apprentice_gateway_mock(const char* script_json, apprentice_gateway** out);
APPRENTICE_API apprentice_status apprentice_gateway_mock_file(const char* script_path, apprentice_gateway** out);
APPRENTICE_API apprentice_status apprentice_gateway_from_config(const apprentice_config* config,
                                                                const char* mock_script_path,
                                                                apprentice_gateway** out);
APPRENTICE_API void apprentice_gateway_free(apprentice_gateway* gateway);

/* Pipeline stages. transcript_path NULL: the config's transcript source.
 * Segment output is an array of {category, start, end}; detailed != 0 adds
 * summaries and sentence ranges. */
APPRENTICE_API apprentice_status apprentice_segment(const apprentice_config* config, apprentice_gateway* gateway,
                                                    const char* transcript_path, int detailed, char** out_json);
/* Knowledge per segment key, from a segment array. */
APPRENTICE_API apprentice_status apprentice_extract(const apprentice_config* config, apprentice_gateway* gateway,
                                                    const char* segments_json, char** out_json);
/* Move plans for a knowledge map. mastery_json is an optional
 * {"<knowledge id>": p} object; history_json an optional earlier history.
 * Output: {"plans": [...], "history": {...}}. */
APPRENTICE_API apprentice_status apprentice_plan(const apprentice_config* config, const char* knowledge_json,
                                                 const char* mastery_json, const char* history_json,
                                                 char** out_json);
/* Canonical DSL text for a knowledge map and its plans. */
APPRENTICE_API apprentice_status apprentice_compile_dsl(const apprentice_config* config, const char* knowledge_json,
                                                        const char* plans_json, char** out_dsl);

/* Drives one session over a scripted event array. dsl_json NULL runs the
 * whole pipeline first; segments_json NULL then means no video clips.
 * Observations persist under data_dir. */
APPRENTICE_API apprentice_status apprentice_replay(const apprentice_config* config, apprentice_gateway* gateway,
                                                   const char* dsl_json, const char* segments_json,
                                                   const char* events_json, const char* data_dir,
                                                   const char* student_id, char** out_report);

APPRENTICE_API apprentice_status apprentice_eval_segmentation(const char* predicted_json, const char* gold_json,
                                                              double margin_s, char** out_json);
APPRENTICE_API apprentice_status apprentice_eval_intents(const char* predicted_json, const char* gold_json,
                                                         const char* topic, char** out_json);

/* One knowledge-tracing step: posterior given the outcome, then transit. */
APPRENTICE_API apprentice_status apprentice_bkt_update(double p_mastery, double p_transit, double p_slip,
                                                       double p_guess, int correct, double* out_p_mastery);

/* Service. options_json: {"data_dir", "mock_script", "config_root",
 * "offline", "token"}; every field optional. */
APPRENTICE_API apprentice_status apprentice_service_create(const char* options_json, apprentice_service** out);
/* In-process request through the HTTP route table, without a socket. */
APPRENTICE_API apprentice_status apprentice_service_request(apprentice_service* service, const char* method,
                                                            const char* path, const char* body, int* out_status,
                                                            char** out_body);
/* Serves HTTP on a background thread; port 0 picks one, reported in out_port. */
APPRENTICE_API apprentice_status apprentice_service_start(apprentice_service* service, const char* host, int port,
                                                          int* out_port);
/* Serves HTTP on the calling thread until apprentice_service_stop(). */
APPRENTICE_API apprentice_status apprentice_service_run(apprentice_service* service, const char* host, int port);
APPRENTICE_API void apprentice_service_stop(apprentice_service* service);
APPRENTICE_API void apprentice_service_free(apprentice_service* service);

#ifdef __cplusplus
}
#endif

#endif /* APPRENTICE_APPRENTICE_H */
