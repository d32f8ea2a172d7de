/* Copyright 2026 The dhls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the dhls library: parse and verify mini-IR programs,
 * analyze and mark them for dynamic scheduling, transform them into
 * process networks, simulate, and run the benchmark corpus.
 *
 * Every function that can fail returns a dhls_status; a human-readable
 * message for the most recent failure on the calling thread is available
 * from dhls_last_error(). Objects returned through out-parameters are
 * owned by the caller and released with the matching _destroy function;
 * strings are released with dhls_string_free.
 */

#ifndef DHLS_DHLS_H
#define DHLS_DHLS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dhls_status {
  DHLS_OK = 0,
  DHLS_ERR_IO = 1,
  DHLS_ERR_PARSE = 2,
  DHLS_ERR_VERIFY = 3,
  DHLS_ERR_CONFIG = 4,
  DHLS_ERR_ANALYSIS = 5,
  DHLS_ERR_TRANSFORM = 6,
  DHLS_ERR_SIM = 7,
  DHLS_ERR_INVALID_ARGUMENT = 8,
  DHLS_ERR_INTERNAL = 9
} dhls_status;

const char* dhls_status_name(dhls_status status);

/* Message for the last failed call on this thread; empty string if none. */
const char* dhls_last_error(void);

void dhls_string_free(char* s);

/* ---- configuration -------------------------------------------------- */

typedef struct dhls_config dhls_config;

dhls_config* dhls_config_create(void); /* defaults */
dhls_status dhls_config_from_json(const char* json_text, dhls_config** out);
dhls_status dhls_config_load(const char* path, dhls_config** out);
char* dhls_config_to_json(const dhls_config* cfg);
void dhls_config_destroy(dhls_config* cfg);

/* ---- programs ------------------------------------------------------- */

typedef struct dhls_program dhls_program;

dhls_status dhls_program_parse(const char* text, dhls_program** out);
dhls_status dhls_program_load(const char* path, dhls_program** out);
char* dhls_program_serialize(const dhls_program* p);
/* 1 when the program carries a process-network section. */
int dhls_program_has_network(const dhls_program* p);
void dhls_program_destroy(dhls_program* p);

/* ---- analysis and transformation ------------------------------------ */

typedef struct dhls_analysis dhls_analysis;

dhls_status dhls_analyze(const dhls_program* p, const dhls_config* cfg,
                         dhls_analysis** out);
char* dhls_analysis_json(const dhls_analysis* a);
/* graph is one of "cfg", "cdg", "ddg"; returns DOT text. */
char* dhls_analysis_dot(const dhls_analysis* a, const char* graph);
int dhls_analysis_marking_empty(const dhls_analysis* a);
void dhls_analysis_destroy(dhls_analysis* a);

dhls_status dhls_transform(const dhls_analysis* a, const dhls_config* cfg,
                           dhls_program** out);

/* ---- inputs --------------------------------------------------------- */

typedef struct dhls_inputs dhls_inputs;

dhls_inputs* dhls_inputs_create(void);
dhls_status dhls_inputs_set_scalar(dhls_inputs* in, const char* name,
                                   int64_t value);
dhls_status dhls_inputs_set_array(dhls_inputs* in, const char* name,
                                  const int64_t* values, size_t count);
/* {"scalars": {name: int}, "arrays": {name: [int]}} */
dhls_status dhls_inputs_from_json(const char* json_text, dhls_inputs** out);
/* Seeded inputs for a known benchmark function.
 * kind: 0 random (config knobs), 1 best-case, 2 worst-case. */
dhls_status dhls_inputs_generate(const dhls_program* p,
                                 const dhls_config* cfg, uint64_t seed,
                                 int kind, dhls_inputs** out);
void dhls_inputs_destroy(dhls_inputs* in);

/* ---- simulation ----------------------------------------------------- */

typedef struct dhls_report dhls_report;

dhls_status dhls_simulate(const dhls_program* p, const dhls_inputs* in,
                          const dhls_config* cfg, int trace_lsq,
                          dhls_report** out);
int64_t dhls_report_cycles(const dhls_report* r);
int dhls_report_deadlock(const dhls_report* r);
char* dhls_report_json(const dhls_report* r);
char* dhls_report_lsq_trace(const dhls_report* r);
/* Compares the report's final state against sequentially interpreting
 * `oracle`'s first function on the same inputs. *match is 1 or 0; when 0
 * and detail is non-NULL, *detail describes the first divergence. */
dhls_status dhls_check_equivalence(const dhls_program* oracle,
                                   const dhls_inputs* in,
                                   const dhls_report* r, int* match,
                                   char** detail);
void dhls_report_destroy(dhls_report* r);

/* ---- benchmark corpus ----------------------------------------------- */

/* Runs every .mir file in corpus_dir under best and worst data and checks
 * equivalence of both the static and the transformed simulation. Any of
 * text_table / json_report may be NULL. *all_equivalent is 1 only if every
 * row matched the oracle. */
dhls_status dhls_bench(const char* corpus_dir, const dhls_config* cfg,
                       char** text_table, char** json_report,
                       int* all_equivalent);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DHLS_DHLS_H */
