// Copyright 2026 The ft-evolve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FTEVOLVE_FTEVOLVE_H_
#define FTEVOLVE_FTEVOLVE_H_

/* C interface to the ft-evolve engine.
 *
 * Every function returning int reports an fte_status. On failure the
 * calling thread's last error message is set (fte_last_error_message) and
 * output parameters are left untouched. Strings returned through char**
 * are heap-allocated JSON documents, released with fte_free_string.
 *
 * config_json arguments take the run configuration document described in
 * ftevolve/config.h; NULL means all defaults. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FTE_API __declspec(dllexport)
#else
#define FTE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fte_status {
  FTE_OK = 0,
  FTE_INVALID_ARGUMENT = 1,
  FTE_IO_ERROR = 2,
  FTE_UNKNOWN_TOKEN = 10,
  FTE_FEATURE_OUT_OF_RANGE = 11,
  FTE_STACK_UNDERFLOW = 12,
  FTE_LEFTOVER_OPERANDS = 13,
  FTE_EMPTY_SEQUENCE = 14,
  FTE_EMPTY_COMBINATION = 15,
  FTE_SEQUENCE_TOO_LONG = 16,
  FTE_COMBINATION_TOO_LONG = 17,
  FTE_MISSING_TARGET = 20,
  FTE_NON_NUMERIC_CELL = 21,
  FTE_TOO_FEW_ROWS = 22,
  FTE_INVALID_TARGET = 23,
  FTE_ARITY_MISMATCH = 24,
  FTE_LENGTH_MISMATCH = 25,
  FTE_DEGENERATE_COLUMN = 26,
  FTE_EMPTY_INPUT = 30,
  FTE_CONSTANT_ACTUALS = 31,
  FTE_TOO_FEW_CLASS_SAMPLES = 32,
  FTE_SINGULAR_DESIGN = 33,
  FTE_EVALUATION_FAILURE = 34,
  FTE_EMPTY_SELECTION = 40,
  FTE_INSUFFICIENT_EXPERIENCES = 41,
  FTE_UNVERIFIED_EXPERIENCE = 42,
  FTE_MALFORMED_LIBRARY = 43,
  FTE_POLICY_UNAVAILABLE = 50,
  FTE_NO_SEQUENCE_FOUND = 51,
  FTE_DISALLOWED_OPERATOR = 52,
  FTE_ENDPOINT_UNREACHABLE = 53,
  FTE_AUTH_FAILURE = 54,
  FTE_MALFORMED_ENDPOINT_RESPONSE = 55,
  FTE_EMPTY_REPORT = 60,
  FTE_MALFORMED_REPORT = 61,
  FTE_INTERNAL = 99
} fte_status;

typedef struct fte_dataset fte_dataset;
typedef struct fte_library fte_library;
typedef struct fte_policy fte_policy;

FTE_API const char* fte_version(void);
/* Stable name such as "UnknownToken"; "Unknown" for foreign values. */
FTE_API const char* fte_status_name(int status);
/* Message of the last failure on this thread; "" when none. */
FTE_API const char* fte_last_error_message(void);
FTE_API void fte_free_string(char* s);

/* target may be NULL (last column). task: "classification" or "regression". */
FTE_API int fte_dataset_load_csv(const char* path, const char* target,
                                 const char* task, fte_dataset** out);
FTE_API void fte_dataset_free(fte_dataset* dataset);
/* {"name", "rows", "features", "task", "columns": [...]} */
FTE_API int fte_dataset_info(const fte_dataset* dataset, char** out_json);

/* A missing file gives an empty library. */
FTE_API int fte_library_load(const char* path, fte_library** out);
FTE_API int fte_library_new(fte_library** out);
FTE_API int fte_library_save(const fte_library* library, const char* path);
FTE_API void fte_library_free(fte_library* library);
FTE_API int fte_library_size(const fte_library* library, size_t* out);
FTE_API int fte_library_version(const fte_library* library, int64_t* out);
FTE_API int fte_library_hash(const fte_library* library, uint64_t* out);

/* Builds the policy named in the config's policy section. */
FTE_API int fte_policy_create(const char* config_json, fte_policy** out);
FTE_API void fte_policy_free(fte_policy* policy);

/* Cross-validated score of the dataset, or of the dataset transformed by
 * `sequence` (postfix text) when non-NULL. */
FTE_API int fte_evaluate(const fte_dataset* dataset, const char* config_json,
                         const char* sequence, char** out_json);

/* Runs the explorer and writes its candidates back into the library. */
FTE_API int fte_explore(const fte_dataset* dataset, fte_library* library,
                        const char* config_json, char** out_json);

/* Re-checks the dataset's experiences, drops failures and low outliers,
 * then (refine.enhance, needs a policy) adds enhancement variants. */
FTE_API int fte_refine(const fte_dataset* dataset, fte_library* library,
                       fte_policy* policy, const char* config_json,
                       char** out_json);

/* Runs the loop in the configured mode. Closed loop updates the library;
 * one-shot modes leave it untouched. Writes run.jsonl and summary.json
 * into out_dir and returns the summary. */
FTE_API int fte_run_loop(const fte_dataset* dataset, fte_library* library,
                         fte_policy* policy, const char* config_json,
                         const char* out_dir, char** out_json);

/* Reads a run JSONL file and writes CSV tables and SVG charts. */
FTE_API int fte_report(const char* jsonl_path, const char* out_dir,
                       char** out_json);

/* Parses postfix text against the default operators and `feature_count`;
 * returns {"postfix", "infix", "combinations"}. */
FTE_API int fte_parse_sequence(const char* text, int feature_count,
                               char** out_json);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* FTEVOLVE_FTEVOLVE_H_ */
