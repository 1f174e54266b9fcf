// Copyright 2026 The synpop Authors
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

/* C interface to the synpop engine. All functions return a synpop_status;
 * on failure synpop_last_error() describes the problem for the calling
 * thread. Handles are opaque and owned by the caller until freed. */

#ifndef SYNPOP_SYNPOP_H_
#define SYNPOP_SYNPOP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SYNPOP_BUILDING_LIBRARY)
#    define SYNPOP_API __declspec(dllexport)
#  else
#    define SYNPOP_API __declspec(dllimport)
#  endif
#else
#  define SYNPOP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum synpop_status {
  SYNPOP_OK = 0,
  SYNPOP_ERROR_INVALID_ARGUMENT = 1, /* null handle or out-of-range argument */
  SYNPOP_ERROR_CONFIG = 2,           /* bad config, missing input path */
  SYNPOP_ERROR_DATA = 3,             /* malformed or inconsistent input data */
  SYNPOP_ERROR_EVOLUTION = 4,        /* search failure, e.g. retries exhausted */
  SYNPOP_ERROR_IO = 5,               /* output could not be written */
  SYNPOP_ERROR_INTERNAL = 6
} synpop_status;

typedef struct synpop_config synpop_config;
typedef struct synpop_pipeline synpop_pipeline;

/* Called once per generation. `stage` is "persons" or "households"; `best`
 * holds `count` normalized archive-best objective values. */
typedef void (*synpop_progress_fn)(void* user, const char* stage, size_t generation,
                                   const double* best, size_t count, double elapsed_seconds);

SYNPOP_API const char* synpop_version(void);
/* Message for the last failure on this thread ("" if none). */
SYNPOP_API const char* synpop_last_error(void);
SYNPOP_API const char* synpop_status_name(synpop_status status);

/* Run configuration. Loading accepts a config file or a run manifest. */
SYNPOP_API synpop_status synpop_config_load(const char* path, synpop_config** out);
SYNPOP_API void synpop_config_free(synpop_config* config);
/* Overrides apply to both pipeline stages. */
SYNPOP_API synpop_status synpop_config_set_seed(synpop_config* config, uint64_t seed);
SYNPOP_API synpop_status synpop_config_set_generations(synpop_config* config, size_t generations);
SYNPOP_API synpop_status synpop_config_set_population_size(synpop_config* config, size_t size);
SYNPOP_API synpop_status synpop_config_set_workers(synpop_config* config, size_t workers);
SYNPOP_API synpop_status synpop_config_set_output_dir(synpop_config* config, const char* path);
/* Writes the output directory path into buf (NUL-terminated, truncated to
 * buf_size). */
SYNPOP_API synpop_status synpop_config_output_dir(const synpop_config* config, char* buf,
                                                  size_t buf_size);

/* Loads schema, tables and rules named by the config. */
SYNPOP_API synpop_status synpop_pipeline_create(const synpop_config* config,
                                                synpop_pipeline** out);
SYNPOP_API void synpop_pipeline_free(synpop_pipeline* pipeline);
SYNPOP_API synpop_status synpop_pipeline_set_progress(synpop_pipeline* pipeline,
                                                      synpop_progress_fn fn, void* user);

/* Writes validation_report.txt; flag_count receives the number of flags. */
SYNPOP_API synpop_status synpop_pipeline_validate(synpop_pipeline* pipeline, size_t* flag_count);
SYNPOP_API synpop_status synpop_pipeline_generate_persons(synpop_pipeline* pipeline);
SYNPOP_API synpop_status synpop_pipeline_generate_households(synpop_pipeline* pipeline);
SYNPOP_API synpop_status synpop_pipeline_run(synpop_pipeline* pipeline);
SYNPOP_API synpop_status synpop_pipeline_report(synpop_pipeline* pipeline);

/* Fraction of households filled exactly after the household stage. */
SYNPOP_API synpop_status synpop_pipeline_complete_rate(const synpop_pipeline* pipeline,
                                                       double* rate);

/* Objective kernels over equal-length double arrays. */
SYNPOP_API synpop_status synpop_l1_objective(const double* actual, const double* observed,
                                             size_t n, double* out);
SYNPOP_API synpop_status synpop_trapezoid_area(const double* actual, const double* observed,
                                               size_t n, double* out);
SYNPOP_API synpop_status synpop_rmse(const double* actual, const double* observed, size_t n,
                                     double* out);

/* Parses a composition code such as "2A 3C" into adult/child/elder counts. */
SYNPOP_API synpop_status synpop_parse_composition(const char* code, int* adults, int* children,
                                                  int* elders, int* total);

#ifdef __cplusplus
}
#endif

#endif /* SYNPOP_SYNPOP_H_ */
