/*
 * Copyright 2026 The tinit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * Stable C interface to the tinit toolkit.
 *
 * Conventions:
 *   - Every fallible call returns ti_status; TI_OK is 0. On failure a
 *     description is available from ti_last_error_message() on the same
 *     thread until the next failing call.
 *   - Objects are opaque handles created through `out` parameters and
 *     released with the matching *_free function (NULL is accepted).
 *   - Matrices are row-major. `precision` is 32 or 64.
 *   - Strings returned through char** are owned by the caller and released
 *     with ti_string_free.
 */

#ifndef TINIT_TINIT_H_
#define TINIT_TINIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TI_API __declspec(dllexport)
#else
#define TI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ti_status {
  TI_OK = 0,
  TI_ERR_INVALID_ARGUMENT = 1,
  TI_ERR_DIMENSION_MISMATCH = 2,
  TI_ERR_ILL_CONDITIONED = 3,
  TI_ERR_IO = 4,
  TI_ERR_FORMAT = 5,
  TI_ERR_CONFIG = 6,
  TI_ERR_CHECK_FAILED = 7,
  TI_ERR_INTERNAL = 70
} ti_status;

typedef struct ti_matrix ti_matrix;
typedef struct ti_stack ti_stack;
typedef struct ti_label_map ti_label_map;
typedef struct ti_logits ti_logits;

typedef struct ti_column_stats {
  double sq_length_mean;
  double sq_length_var;
  double inner_mean;
  double inner_var;
} ti_column_stats;

typedef struct ti_edge_scores {
  double precision;
  double recall;
  double f_measure;
  double performance_ratio;
} ti_edge_scores;

typedef struct ti_loss_terms {
  double property_term;
  double coordinate_term;
  double total;
} ti_loss_terms;

TI_API const char* ti_version(void);
TI_API const char* ti_status_string(ti_status status);
TI_API const char* ti_last_error_message(void);
TI_API void ti_string_free(char* s);

/* ---- matrices ---- */

/* values may be NULL (zero fill); otherwise rows*cols doubles. */
TI_API ti_status ti_matrix_create(int precision, size_t rows, size_t cols,
                                  const double* values, ti_matrix** out);
TI_API ti_status ti_matrix_sample_normal(int precision, size_t rows, size_t cols,
                                         uint64_t seed, double mean, double variance,
                                         ti_matrix** out);
TI_API ti_status ti_matrix_sample_uniform(int precision, size_t rows, size_t cols,
                                          uint64_t seed, double lo, double hi,
                                          ti_matrix** out);
TI_API void ti_matrix_free(ti_matrix* m);
TI_API size_t ti_matrix_rows(const ti_matrix* m);
TI_API size_t ti_matrix_cols(const ti_matrix* m);
TI_API int ti_matrix_precision(const ti_matrix* m);
/* Copies rows*cols values into dst; len must be at least that. */
TI_API ti_status ti_matrix_copy_out(const ti_matrix* m, double* dst, size_t len);
TI_API ti_status ti_matrix_matmul(const ti_matrix* a, const ti_matrix* b, ti_matrix** out);
/* cond_limit <= 0 selects the default (1e8). */
TI_API ti_status ti_matrix_right_inverse(const ti_matrix* a, double cond_limit,
                                         ti_matrix** out);
TI_API ti_status ti_matrix_column_stats(const ti_matrix* m, ti_column_stats* out);
TI_API ti_status ti_matrix_save(const ti_matrix* m, const char* path);
TI_API ti_status ti_matrix_load(const char* path, ti_matrix** out);

/* ---- transparent stacks ---- */

/* activation: none, relu, leaky_relu, soft_relu, log_sigmoid, tanh, sigmoid,
 * cube, zero. wrapper: "sign_split" or "general". */
TI_API ti_status ti_stack_build(int precision, const size_t* dims, size_t n_dims,
                                uint64_t seed, const char* activation, double leaky_delta,
                                const char* wrapper, ti_stack** out);
/* kind: random, xavier or net2net. */
TI_API ti_status ti_stack_baseline(int precision, const char* kind, const size_t* dims,
                                   size_t n_dims, uint64_t seed, const char* activation,
                                   double leaky_delta, ti_stack** out);
TI_API void ti_stack_free(ti_stack* s);
TI_API size_t ti_stack_in_dim(const ti_stack* s);
TI_API size_t ti_stack_out_dim(const ti_stack* s);
TI_API size_t ti_stack_parameter_count(const ti_stack* s);
TI_API ti_status ti_stack_forward(const ti_stack* s, const ti_matrix* batch, ti_matrix** out);
TI_API ti_status ti_stack_init_rate(const ti_stack* s, double eps, double* out);
TI_API ti_status ti_stack_recovery_rate(const ti_stack* s, const ti_matrix* inputs,
                                        double eps, double* out);
TI_API ti_status ti_stack_save(const ti_stack* s, const char* layers_path,
                               const char* sidecar_path);

/* ---- label maps and logits ---- */

TI_API ti_status ti_label_map_create(uint32_t height, uint32_t width, const uint32_t* ids,
                                     ti_label_map** out);
TI_API ti_status ti_label_map_load(const char* path, ti_label_map** out);
TI_API ti_status ti_label_map_save(const ti_label_map* m, const char* path);
TI_API void ti_label_map_free(ti_label_map* m);
TI_API uint32_t ti_label_map_height(const ti_label_map* m);
TI_API uint32_t ti_label_map_width(const ti_label_map* m);
TI_API ti_status ti_label_map_copy_out(const ti_label_map* m, uint32_t* dst, size_t len);

/* values: n_labels x (height*width), label-major. */
TI_API ti_status ti_logits_create(uint32_t height, uint32_t width, size_t n_labels,
                                  const float* values, ti_logits** out);
TI_API ti_status ti_logits_load(const char* path, ti_logits** out);
TI_API ti_status ti_logits_save(const ti_logits* l, const char* path);
TI_API void ti_logits_free(ti_logits* l);
TI_API size_t ti_logits_n_labels(const ti_logits* l);
TI_API ti_status ti_logits_copy_out(const ti_logits* l, float* dst, size_t len);

/* Every pixel takes the mean logits of its superpixel. */
TI_API ti_status ti_enforce_consistency(const ti_logits* logits, const ti_label_map* spmap,
                                        ti_logits** out);
TI_API ti_status ti_argmax_labels(const ti_logits* logits, ti_label_map** out);

/* ---- losses and metrics ---- */

/* features: (height*width) x K; scores: (height*width) x 9 softmax scores over
 * the 3x3 grid neighbourhood. distance: "l2" or "cross_entropy". grad_step > 0
 * also fills *grad_rel_error (may be NULL otherwise). */
TI_API ti_status ti_superpixel_loss(const ti_matrix* features, const ti_matrix* scores,
                                    size_t height, size_t width, size_t interval,
                                    double m_weight, const char* distance,
                                    double grad_step, ti_loss_terms* out,
                                    double* grad_rel_error);

TI_API ti_status ti_score_edges(const ti_label_map* pred, const ti_label_map* gt,
                                int radius, ti_edge_scores* out);

/* ---- experiments ---- */

/* *diagnostics receives a JSON array of strings (empty when valid). */
TI_API ti_status ti_experiment_validate(const char* config_json, char** diagnostics);
/* Runs and writes the report. *summary (may be NULL) receives a one-line
 * summary; *report (may be NULL) the full report text. A failed built-in
 * cross-check returns TI_ERR_CHECK_FAILED after writing the report. */
TI_API ti_status ti_experiment_run(const char* config_json, char** summary, char** report);

#ifdef __cplusplus
}
#endif

#endif /* TINIT_TINIT_H_ */
