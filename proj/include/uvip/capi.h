// Copyright 2026 The UVIP Authors.
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

/* C interface to the uvip library.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return a uvip_status; on failure uvip_last_error() describes the
 * most recent error on the calling thread. Strings are copied into caller
 * buffers: `needed` receives the size including the terminating NUL and
 * UVIP_ERR_BUFFER is returned when `capacity` is too small. Arrays are
 * caller-allocated and sized from the accessor functions. */
#ifndef UVIP_CAPI_H
#define UVIP_CAPI_H

#include <stddef.h>

#if defined(UVIP_BUILDING_LIBRARY)
#define UVIP_API __attribute__((visibility("default")))
#else
#define UVIP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uvip_status {
  UVIP_OK = 0,
  UVIP_ERR_INVALID_ARGUMENT = 1,
  UVIP_ERR_DIMENSION = 2,
  UVIP_ERR_INVALID_MODEL = 3,
  UVIP_ERR_INCONSISTENT = 4,
  UVIP_ERR_UNSUPPORTED = 5,
  UVIP_ERR_PARSE = 6,
  UVIP_ERR_IO = 7,
  UVIP_ERR_BUFFER = 8,
  UVIP_ERR_NULL = 9,
  UVIP_ERR_INTERNAL = 10
} uvip_status;

typedef enum uvip_log_level {
  UVIP_LOG_DEBUG = 0,
  UVIP_LOG_INFO = 1,
  UVIP_LOG_WARNING = 2
} uvip_log_level;

typedef struct uvip_config uvip_config;
typedef struct uvip_model uvip_model;
typedef struct uvip_policy uvip_policy;
typedef struct uvip_report uvip_report;
typedef struct uvip_interpolant uvip_interpolant;

typedef void (*uvip_log_fn)(uvip_log_level level, const char* message, void* user);

UVIP_API const char* uvip_version(void);
UVIP_API const char* uvip_status_string(uvip_status status);
/* Message of the last failure on this thread; "" when none. */
UVIP_API const char* uvip_last_error(void);
/* Receives warnings (e.g. Lipschitz cap, k_max exhaustion) and debug traces.
 * Pass NULL to silence. */
UVIP_API void uvip_set_log_callback(uvip_log_fn fn, void* user);

/* ---- experiment configuration ---------------------------------------- */
UVIP_API uvip_status uvip_config_new(uvip_config** out);
UVIP_API uvip_status uvip_config_parse_string(const char* text, uvip_config** out);
UVIP_API uvip_status uvip_config_parse_file(const char* path, uvip_config** out);
UVIP_API uvip_status uvip_config_set(uvip_config* cfg, const char* key, const char* value);
UVIP_API uvip_status uvip_config_get(const uvip_config* cfg, const char* key, char* buf,
                                     size_t capacity, size_t* needed);
UVIP_API uvip_status uvip_config_emit(const uvip_config* cfg, char* buf, size_t capacity,
                                      size_t* needed);
UVIP_API void uvip_config_free(uvip_config* cfg);

/* ---- models ------------------------------------------------------------ */
UVIP_API uvip_status uvip_model_create(const uvip_config* cfg, uvip_model** out);
UVIP_API int uvip_model_is_tabular(const uvip_model* m);
/* Number of states of a tabular model, 0 for box models. */
UVIP_API size_t uvip_model_state_count(const uvip_model* m);
UVIP_API size_t uvip_model_state_dim(const uvip_model* m);
UVIP_API size_t uvip_model_action_count(const uvip_model* m);
UVIP_API size_t uvip_model_noise_dim(const uvip_model* m);
UVIP_API double uvip_model_gamma(const uvip_model* m);
UVIP_API double uvip_model_r_max(const uvip_model* m);
/* out receives state_dim values. */
UVIP_API uvip_status uvip_model_step(const uvip_model* m, const double* x, size_t action,
                                     const double* xi, double* out);
UVIP_API uvip_status uvip_model_save_tabular(const uvip_model* m, const char* path);
UVIP_API void uvip_model_free(uvip_model* m);

/* ---- dynamic programming ----------------------------------------------- */
/* v_out: state_count values; q_out: state_count * action_count, row-major.
 * Either may be NULL. */
UVIP_API uvip_status uvip_value_iteration(const uvip_model* m, double eps, double* v_out,
                                          double* q_out, size_t* iterations);
UVIP_API uvip_status uvip_bellman_residual(const uvip_model* m, const double* v, double* out);
UVIP_API uvip_status uvip_upper_solution_check(const uvip_model* m, const double* v, double* out);

/* ---- policies ---------------------------------------------------------- */
/* The policy selected by the configuration for this model. */
UVIP_API uvip_status uvip_policy_resolve(const uvip_config* cfg, const uvip_model* m,
                                         uvip_policy** out);
UVIP_API uvip_status uvip_policy_load(const char* path, uvip_policy** out);
/* Lowest-index argmax of a row-major Q table. */
UVIP_API uvip_status uvip_policy_greedy(const double* q, size_t n_states, size_t n_actions,
                                        uvip_policy** out);
UVIP_API uvip_status uvip_policy_save(const uvip_policy* p, const char* path);
UVIP_API uvip_status uvip_policy_value_exact(const uvip_model* m, const uvip_policy* p,
                                             double* v_out);
UVIP_API uvip_status uvip_martingale_check(const uvip_model* m, const uvip_policy* p,
                                           double* out);
UVIP_API void uvip_policy_free(uvip_policy* p);

/* ---- upper value iteration --------------------------------------------- */
/* Runs with the configuration's uvip.* settings and seed. The result does
 * not depend on `threads`. */
UVIP_API uvip_status uvip_run(const uvip_model* m, const uvip_policy* p, const uvip_config* cfg,
                              unsigned threads, uvip_report** out);
UVIP_API size_t uvip_report_size(const uvip_report* r);
UVIP_API size_t uvip_report_dim(const uvip_report* r);
UVIP_API size_t uvip_report_replicates(const uvip_report* r);
UVIP_API int uvip_report_converged(const uvip_report* r);
UVIP_API size_t uvip_report_iterations(const uvip_report* r);
UVIP_API double uvip_report_lipschitz(const uvip_report* r);
/* Each array holds report_size values; any may be NULL. */
UVIP_API uvip_status uvip_report_values(const uvip_report* r, double* v_pi, double* v_up,
                                        double* gap, double* std_error);
/* coords receives report_dim values. */
UVIP_API uvip_status uvip_report_state(const uvip_report* r, size_t index, double* coords);
UVIP_API uvip_status uvip_report_interval(const uvip_report* r, double delta, double* lower,
                                          double* upper);
UVIP_API uvip_status uvip_report_query(const uvip_report* r, const double* x, double* v_up,
                                       double* std_error, double* inflation);
UVIP_API uvip_status uvip_report_fingerprint(const uvip_report* r, char* buf, size_t capacity,
                                             size_t* needed);
UVIP_API uvip_status uvip_report_write_csv(const uvip_report* r, const char* path);
UVIP_API void uvip_report_free(uvip_report* r);

/* ---- Lipschitz interpolation ------------------------------------------- */
/* coords: n * dim row-major. lipschitz < 0 requests the data estimate.
 * discrete != 0 selects the 0/1 metric, else Euclidean. */
UVIP_API uvip_status uvip_interpolant_create(size_t n, size_t dim, const double* coords,
                                             const double* values, double lipschitz,
                                             int discrete, uvip_interpolant** out);
UVIP_API uvip_status uvip_interpolant_eval(const uvip_interpolant* f, const double* x,
                                           double* out);
UVIP_API double uvip_interpolant_lipschitz(const uvip_interpolant* f);
UVIP_API uvip_status uvip_interpolant_save(const uvip_interpolant* f, const char* path);
UVIP_API uvip_status uvip_interpolant_load(const char* path, uvip_interpolant** out);
UVIP_API void uvip_interpolant_free(uvip_interpolant* f);
/* Max over probe points of the Euclidean distance to the nearest design point. */
UVIP_API uvip_status uvip_covering_radius(size_t n, size_t dim, const double* design,
                                          size_t n_probe, const double* probe, double* out);

/* ---- commands ---------------------------------------------------------- */
/* name: solve | evaluate | uvip | figure1 | figure3 | check. output_dir may
 * be NULL (config `output`, then $UVIP_OUTPUT_DIR, then "."). exit_code gets
 * the process exit code the CLI should use; summary gets one line per note
 * followed by "manifest: <path>", truncated to `capacity` (the command has
 * already run, so a short buffer is not an error; `needed` tells the full
 * size). */
UVIP_API uvip_status uvip_command(const char* name, const uvip_config* cfg,
                                  const char* output_dir, unsigned threads, int* exit_code,
                                  char* summary, size_t capacity, size_t* needed);
/* Number of outputs whose hash no longer matches; report lists them. */
UVIP_API uvip_status uvip_manifest_verify(const char* path, size_t* mismatches, char* report,
                                          size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* UVIP_CAPI_H */
