// Copyright 2026 The Shiftscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * C interface to the shiftscope engine. All functions return an ss_status;
 * on failure ss_last_error() holds a message for the calling thread.
 */
#ifndef SHIFTSCOPE_SHIFTSCOPE_H_
#define SHIFTSCOPE_SHIFTSCOPE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHIFTSCOPE_API __declspec(dllexport)
#else
#define SHIFTSCOPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_INVALID_ARGUMENT = 2,
  SS_ERR_PARSE = 3,
  SS_ERR_DUPLICATE_ID = 4,
  SS_ERR_ATTRIBUTE_SCHEMA_MISMATCH = 5,
  SS_ERR_BAD_MAGIC = 6,
  SS_ERR_COUNT_MISMATCH = 7,
  SS_ERR_NON_FINITE_VALUE = 8,
  SS_ERR_ROW_COUNT_MISMATCH = 9,
  SS_ERR_SPLIT_EMPTY = 10,
  SS_ERR_DIMENSION_MISMATCH = 11,
  SS_ERR_NON_POSITIVE_RATIO = 12,
  SS_ERR_DIVERGED_LOSS = 13,
  SS_ERR_TOO_FEW_POINTS = 14,
  SS_ERR_UNKNOWN_SPACE = 15,
  SS_ERR_UNKNOWN_INSTANCE = 16,
  SS_ERR_UNKNOWN_CLUSTER = 17,
  SS_ERR_MISSING_MODEL = 18,
  SS_ERR_MISSING_ARTIFACT = 19,
  SS_ERR_SCORE_COVERAGE_GAP = 20,
  SS_ERR_COVERAGE_GAP = 21,
  SS_ERR_OUT_OF_RANGE = 22,
  SS_ERR_DEGENERATE_VARIANCE = 23,
  SS_ERR_NO_ATTRIBUTES = 24,
  SS_ERR_SINGLE_CLASS = 25,
  SS_ERR_IO = 26,
  SS_ERR_PORT_UNAVAILABLE = 27,
  SS_ERR_UNKNOWN_SUBCOMMAND = 28,
  SS_ERR_STORE_LOCKED = 29,
  SS_ERR_INTERNAL = 30
} ss_status;

/* Opaque handle to an opened store directory and its service. */
typedef struct ss_store ss_store;

typedef struct ss_train_options {
  uint32_t hidden_dim;
  int32_t epochs;
  double learning_rate;
  uint32_t batch_size;
  uint64_t seed;
} ss_train_options;

SHIFTSCOPE_API const char* ss_version(void);
SHIFTSCOPE_API const char* ss_status_name(ss_status status);
SHIFTSCOPE_API const char* ss_last_error(void);

/* hidden 32, 10 epochs, learning rate 0.01, batch 64, seed 0. */
SHIFTSCOPE_API void ss_train_options_init(ss_train_options* options);

SHIFTSCOPE_API ss_status ss_ingest(const char* manifest_path,
                                   const char* embeddings_path,
                                   const char* space, const char* out_dir);

/* final_loss may be NULL. */
SHIFTSCOPE_API ss_status ss_train(const char* store_dir, const char* space,
                                  const ss_train_options* options,
                                  double* final_loss);

/* method: density-ratio | iforest | center. seed drives the forest. */
SHIFTSCOPE_API ss_status ss_score(const char* store_dir, const char* method,
                                  const char* space, uint64_t seed);

/* n_ranked receives the number of ranked summaries (0 without scores). */
SHIFTSCOPE_API ss_status ss_cluster(const char* store_dir, const char* space,
                                    size_t k, size_t top, size_t* n_ranked);

SHIFTSCOPE_API ss_status ss_project_pca(const char* store_dir,
                                        const char* space);
SHIFTSCOPE_API ss_status ss_project_import(const char* store_dir,
                                           const char* csv_path);

/* methods and spaces are comma-separated lists. */
SHIFTSCOPE_API ss_status ss_bench(const char* store_dir, const char* methods,
                                  const char* spaces,
                                  const ss_train_options* options,
                                  uint64_t seed, const char* out_csv);

SHIFTSCOPE_API ss_status ss_store_open(const char* store_dir, ss_store** out);
SHIFTSCOPE_API void ss_store_close(ss_store* store);
SHIFTSCOPE_API ss_status ss_store_counts(const ss_store* store,
                                         size_t* n_train, size_t* n_test);

/* Serves the HTTP API until ss_serve_stop(); blocks the calling thread. */
SHIFTSCOPE_API ss_status ss_serve(ss_store* store, const char* host, int port);
/* Serves on a background thread. *port == 0 picks a free port and writes it
 * back. */
SHIFTSCOPE_API ss_status ss_serve_start(ss_store* store, const char* host,
                                        int* port);
SHIFTSCOPE_API ss_status ss_serve_stop(ss_store* store);

/* Dispatches one request in-process. *body receives a NUL-terminated copy of
 * the response body to be released with ss_free(); body_len may be NULL. */
SHIFTSCOPE_API ss_status ss_request(const ss_store* store, const char* method,
                                    const char* target, const char* request_body,
                                    int* http_status, char** body,
                                    size_t* body_len);
SHIFTSCOPE_API void ss_free(void* ptr);

#ifdef __cplusplus
}
#endif

#endif /* SHIFTSCOPE_SHIFTSCOPE_H_ */
