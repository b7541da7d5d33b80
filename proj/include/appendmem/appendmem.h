// Copyright 2026 The Appendable Memory Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the Appendable Memory library.
 *
 * Every function returns an am_status; on failure am_last_error() holds a
 * human-readable message for the calling thread. Handles are opaque and
 * owned by the caller, who releases them with the matching *_free call.
 * A checkpoint is immutable once created and may be shared between threads;
 * a session must not be appended to concurrently with any other call on it.
 */
#ifndef APPENDMEM_APPENDMEM_H_
#define APPENDMEM_APPENDMEM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AM_API __declspec(dllexport)
#else
#define AM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum am_status {
  AM_OK = 0,
  AM_ERR_INVALID_ARGUMENT = 1,
  AM_ERR_SHAPE_MISMATCH = 2,
  AM_ERR_IO = 3,
  AM_ERR_BAD_MAGIC = 4,
  AM_ERR_UNSUPPORTED_VERSION = 5,
  AM_ERR_TRUNCATED = 6,
  AM_ERR_DIVERGED = 7,
  AM_ERR_TASK_MISMATCH = 8,
  AM_ERR_INTERNAL = 99
} am_status;

typedef enum am_task { AM_TASK_KV = 0, AM_TASK_SORT = 1 } am_task;
typedef enum am_mode { AM_MODE_STANDARD = 0, AM_MODE_RANDOMIZED = 1 } am_mode;
typedef enum am_stop_metric {
  AM_STOP_TRAIN_ACC = 0,
  AM_STOP_VAL_ACC = 1
} am_stop_metric;
typedef enum am_stop_reason {
  AM_STOPPED_AT_THRESHOLD = 0,
  AM_STOPPED_AT_MAX_EPOCHS = 1
} am_stop_reason;

typedef struct am_checkpoint am_checkpoint;
typedef struct am_session am_session;

AM_API const char* am_version(void);
AM_API const char* am_last_error(void);
AM_API const char* am_status_string(am_status status);

/* ---- training ---------------------------------------------------------- */

typedef struct am_train_config {
  am_task task;
  am_mode mode;
  uint32_t n;
  uint32_t batch_size;
  uint32_t hidden_dim;
  uint32_t key_dim;
  double lr;
  am_stop_metric stop_metric;
  double stop_threshold;
  uint64_t max_epochs;
  uint64_t eval_every;
  uint64_t seed;
  float leaky_slope;
} am_train_config;

typedef struct am_epoch_row {
  uint64_t epoch;
  double loss;
  double train_acc;
  double val_acc;
} am_epoch_row;

typedef struct am_train_report {
  uint64_t epochs_run;
  double final_train_acc;
  double final_val_acc;
  am_stop_reason stop_reason;
} am_train_report;

typedef void (*am_epoch_callback)(const am_epoch_row* row, void* user);

AM_API void am_train_config_defaults(am_task task, am_mode mode,
                                     am_train_config* out);
AM_API am_status am_train_config_validate(const am_train_config* config);

/* Trains a model. metrics_path and callback may be NULL. On success *out
 * receives a new checkpoint. */
AM_API am_status am_train(const am_train_config* config,
                          const char* metrics_path, am_epoch_callback callback,
                          void* user, am_checkpoint** out,
                          am_train_report* report);

/* ---- checkpoints ------------------------------------------------------- */

typedef struct am_model_info {
  am_task task;
  uint32_t key_dim;
  uint32_t value_dim;
  uint32_t query_dim;
  uint32_t hidden_dim;
  uint32_t memory_dim;
  uint32_t num_classes;
  float leaky_slope;
  uint32_t trained_n;
  uint64_t seed;
  uint64_t epochs_run;
} am_model_info;

AM_API am_status am_checkpoint_load(const char* path, am_checkpoint** out);
AM_API am_status am_checkpoint_save(const am_checkpoint* checkpoint,
                                    const char* path);
AM_API am_status am_checkpoint_info(const am_checkpoint* checkpoint,
                                    am_model_info* out);
AM_API void am_checkpoint_free(am_checkpoint* checkpoint);

/* ---- sessions ---------------------------------------------------------- */

AM_API am_status am_session_open(const am_checkpoint* checkpoint,
                                 uint64_t seed, am_session** out);
AM_API am_status am_session_append(am_session* session, const float* key,
                                   size_t key_len, int32_t value);
/* probabilities may be NULL; otherwise probabilities_len must equal the
 * model's class count. */
AM_API am_status am_session_lookup(const am_session* session, const float* key,
                                   size_t key_len, int32_t* value,
                                   float* probabilities,
                                   size_t probabilities_len);
AM_API am_status am_session_append_count(const am_session* session,
                                         uint64_t* out);
AM_API am_status am_session_memory(const am_session* session, float* out,
                                   size_t len);
AM_API am_status am_session_save(const am_session* session, const char* path);
AM_API am_status am_session_load(const am_checkpoint* checkpoint,
                                 const char* path, am_session** out);
AM_API void am_session_free(am_session* session);

/* ---- experiments ------------------------------------------------------- */

typedef enum am_experiment {
  AM_EXP_TEST = 0,
  AM_EXP_CAPACITY = 1,
  AM_EXP_POSITIONAL = 2,
  AM_EXP_SORT_EXACT = 3,
  AM_EXP_OVERFIT = 4
} am_experiment;

typedef struct am_eval_options {
  am_experiment experiment;
  uint64_t trials;
  uint64_t seed;
  /* test/positional/sort-exact input count; 0 picks the default (trained n,
   * or twice it for positional). */
  uint32_t n_inputs;
  /* capacity input counts; NULL picks 2..8,16,32,...,256. */
  const uint32_t* counts;
  size_t counts_len;
  /* overfit training sizes; NULL picks the checkpoint's trained n. */
  const uint32_t* n_values;
  size_t n_values_len;
  /* overfit runs: batch size (0 = 1024) and epoch cap (0 = 500000). */
  uint32_t batch_size;
  uint64_t max_epochs;
  /* results CSV (may be NULL) and the label written in its comment line. */
  const char* out_path;
  const char* checkpoint_label;
} am_eval_options;

AM_API void am_eval_options_defaults(am_experiment experiment,
                                     am_eval_options* out);

/* Runs one experiment; *headline receives the experiment's summary
 * accuracy. Running sort-exact on a key-value model (or a key-value
 * experiment on a sorting model) yields AM_ERR_TASK_MISMATCH. */
AM_API am_status am_eval(const am_checkpoint* checkpoint,
                         const am_eval_options* options, double* headline);

/* Sorts numbers with a sorting model. sorted_out has room for n values and
 * receives, for each rank, the input whose tag scored highest. *complete is
 * set to 1 when no input was chosen twice. */
AM_API am_status am_sort(const am_checkpoint* checkpoint,
                         const double* numbers, size_t n, uint64_t seed,
                         double* sorted_out, int* complete);

/* ---- verification ------------------------------------------------------ */

typedef struct am_gradcheck_options {
  int32_t trials;
  double eps;
  uint64_t seed;
  int32_t double_precision;
  double tolerance;
} am_gradcheck_options;

typedef struct am_gradcheck_result {
  double max_rel_error;
  int32_t passed;
  uint64_t coordinates;
  uint64_t refined;
  uint64_t skipped;
} am_gradcheck_result;

AM_API void am_gradcheck_defaults(am_gradcheck_options* out);
AM_API am_status am_gradcheck(const am_gradcheck_options* options,
                              am_gradcheck_result* out);

/* Writes one generated episode as `key_csv<TAB>value` lines into buf
 * (NUL-terminated). *needed receives the required size including the NUL;
 * when buf_len is too small nothing is written and AM_ERR_INVALID_ARGUMENT
 * is returned. */
AM_API am_status am_dump_episode(am_task task, uint32_t n, uint32_t key_dim,
                                 uint64_t seed, char* buf, size_t buf_len,
                                 size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* APPENDMEM_APPENDMEM_H_ */
