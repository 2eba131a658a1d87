/*
 * Copyright 2026 The dpmean Authors
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

/* C interface to the differentially private mean-estimation library.
 * All functions return DPMEAN_OK (0) on success; on failure they return a
 * nonzero code and dpmean_last_error() describes the problem for the
 * calling thread. Handles are opaque and must be released with the
 * matching _free function. */

#ifndef DPMEAN_H_
#define DPMEAN_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpmean_status {
  DPMEAN_OK = 0,
  DPMEAN_ERROR = 1,        /* unexpected runtime failure */
  DPMEAN_CONFIG_ERROR = 2, /* invalid parameters or configuration */
  DPMEAN_DATA_ERROR = 3,   /* malformed input data or files */
  DPMEAN_BUDGET_ERROR = 4  /* privacy-budget violation */
} dpmean_status;

typedef struct dpmean_dataset dpmean_dataset;
typedef struct dpmean_result dpmean_result;

const char* dpmean_version(void);
/* Message for the most recent failure on this thread; never NULL. */
const char* dpmean_last_error(void);

/* ---- datasets: n x d integers in [0, u] ---- */

int dpmean_dataset_create(const int64_t* values, int64_t n, int64_t d,
                          int64_t universe, dpmean_dataset** out);
/* The synthetic line dataset {i * 1_d : i in [1, n]} with u = n. */
int dpmean_dataset_line(int64_t n, int64_t d, dpmean_dataset** out);
/* IDX-format MNIST; digit in [0, 9] filters, -1 keeps all. */
int dpmean_dataset_mnist(const char* images_path, const char* labels_path,
                         int digit, dpmean_dataset** out);
void dpmean_dataset_free(dpmean_dataset* dataset);

int64_t dpmean_dataset_n(const dpmean_dataset* dataset);
int64_t dpmean_dataset_d(const dpmean_dataset* dataset);
int64_t dpmean_dataset_universe(const dpmean_dataset* dataset);

/* ---- estimators ----
 * noise_enabled = 0 disables every noise injection (testing hook). */

int dpmean_shifted_clipped_mean(const dpmean_dataset* dataset, double rho,
                                double beta, uint64_t seed, int noise_enabled,
                                dpmean_result** out);
int dpmean_clipped_mean_auto(const dpmean_dataset* dataset, double rho,
                             double beta, uint64_t seed, int noise_enabled,
                             dpmean_result** out);
int dpmean_local_mean(const dpmean_dataset* dataset, double rho, double beta,
                      uint64_t seed, int noise_enabled, dpmean_result** out);
int dpmean_shuffle_mean(const dpmean_dataset* dataset, double epsilon,
                        double delta, double beta, uint64_t seed,
                        int noise_enabled, dpmean_result** out);

int64_t dpmean_result_dim(const dpmean_result* result);
/* Copies the estimate into out[0 .. dim-1]. */
int dpmean_result_values(const dpmean_result* result, double* out, int64_t len);
double dpmean_result_clip_threshold(const dpmean_result* result);
int64_t dpmean_result_clip_rank(const dpmean_result* result);
int dpmean_result_fallback_zero(const dpmean_result* result);
/* 1 when the privacy ledger closed exactly on the declared budget. */
int dpmean_result_ledger_closed(const dpmean_result* result);
void dpmean_result_free(dpmean_result* result);

/* ---- benchmark harness ---- */

typedef struct dpmean_experiment_config {
  const char* model;     /* central | local | shuffle */
  const char* estimator; /* shifted-cm | cm | naive-gaussian | nonprivate */
  int64_t n;
  int64_t d;
  double rho;
  double epsilon;
  double delta;
  const char* data; /* gaussian | line | mnist */
  double mu_scale;
  double kappa;
  double range_r; /* 0 selects the default 50 sqrt(d) */
  int digit;
  const char* mnist_images;
  const char* mnist_labels;
  int trials;
  double trim;
  uint64_t seed;
  const char* out_path; /* CSV destination; NULL or empty skips the file */
  double sigma_min;
  double beta;
} dpmean_experiment_config;

/* Fills a config with the library defaults (n=4000, d=128, rho=0.5, ...). */
void dpmean_experiment_config_init(dpmean_experiment_config* config);

/* Runs the experiment, writing CSV when out_path is set. trimmed_l2_out
 * (nullable) receives the trimmed-mean l2 error across trials. */
int dpmean_run_experiment(const dpmean_experiment_config* config,
                          double* trimmed_l2_out);

/* Clipped-mean error across `points` quantile ranks on the line dataset;
 * chosen_error_out receives the error at the rank n - round(sqrt(2d/rho)).
 * Either output pointer may be NULL. Writes CSV when out_path is set. */
int dpmean_sweep_quantile(const dpmean_experiment_config* config, int points,
                          double* chosen_error_out, double* min_error_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DPMEAN_H_ */
