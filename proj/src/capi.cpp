//
// Copyright 2026 The dpmean Authors
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
//

#include "dpmean.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "dpmean/bench.hpp"
#include "dpmean/central.hpp"
#include "dpmean/errors.hpp"
#include "dpmean/local.hpp"
#include "dpmean/shuffle.hpp"

struct dpmean_dataset {
  dpmean::Dataset data;
};

struct dpmean_result {
  std::vector<double> value;
  double clip_threshold = 0.0;
  int64_t clip_rank = 0;
  int fallback_zero = 0;
  int ledger_closed = 0;
};

namespace {

thread_local std::string g_last_error;

int fail(dpmean_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return DPMEAN_OK;
  } catch (const dpmean::ConfigError& e) {
    return fail(DPMEAN_CONFIG_ERROR, e.what());
  } catch (const dpmean::DataError& e) {
    return fail(DPMEAN_DATA_ERROR, e.what());
  } catch (const dpmean::BudgetError& e) {
    return fail(DPMEAN_BUDGET_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(DPMEAN_ERROR, e.what());
  } catch (...) {
    return fail(DPMEAN_ERROR, "unknown error");
  }
}

dpmean_result* wrap_estimate(dpmean::MeanEstimate&& estimate) {
  auto* result = new dpmean_result();
  result->value = std::move(estimate.value);
  result->clip_threshold = estimate.clip_threshold;
  result->clip_rank = estimate.clip_rank;
  result->fallback_zero = estimate.fallback_zero ? 1 : 0;
  result->ledger_closed = estimate.ledger.closed() ? 1 : 0;
  return result;
}

dpmean::ExperimentConfig to_config(const dpmean_experiment_config* config) {
  if (config == nullptr) throw dpmean::ConfigError("config is NULL");
  dpmean::ExperimentConfig cfg;
  cfg.model = dpmean::parse_model(config->model ? config->model : "central");
  cfg.estimator =
      dpmean::parse_estimator(config->estimator ? config->estimator : "shifted-cm");
  cfg.n = config->n;
  cfg.d = static_cast<int>(config->d);
  cfg.rho = config->rho;
  cfg.epsilon = config->epsilon;
  cfg.delta = config->delta;
  const std::string data = config->data ? config->data : "gaussian";
  if (data == "gaussian") {
    cfg.data.kind = dpmean::DataSpec::Kind::kGaussian;
  } else if (data == "line") {
    cfg.data.kind = dpmean::DataSpec::Kind::kLine;
  } else if (data == "mnist") {
    cfg.data.kind = dpmean::DataSpec::Kind::kMnist;
  } else {
    throw dpmean::ConfigError("unknown data spec: " + data);
  }
  cfg.data.mu_scale = config->mu_scale;
  cfg.data.kappa = config->kappa;
  cfg.data.range_r = config->range_r;
  cfg.data.digit = config->digit;
  if (config->mnist_images) cfg.data.images_path = config->mnist_images;
  if (config->mnist_labels) cfg.data.labels_path = config->mnist_labels;
  cfg.trials = config->trials;
  cfg.trim = config->trim;
  cfg.seed = config->seed;
  if (config->out_path) cfg.out_path = config->out_path;
  cfg.sigma_min = config->sigma_min;
  cfg.beta = config->beta;
  return cfg;
}

}  // namespace

extern "C" {

const char* dpmean_version(void) { return "0.1.0"; }

const char* dpmean_last_error(void) { return g_last_error.c_str(); }

int dpmean_dataset_create(const int64_t* values, int64_t n, int64_t d,
                          int64_t universe, dpmean_dataset** out) {
  return guarded([&] {
    if (values == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    if (n < 1 || d < 1) throw dpmean::DataError("dataset must be nonempty");
    dpmean::IntMatrix rows(static_cast<std::size_t>(n),
                           static_cast<std::size_t>(d));
    std::copy(values, values + n * d, rows.values.begin());
    *out = new dpmean_dataset{dpmean::Dataset(std::move(rows), universe)};
  });
}

int dpmean_dataset_line(int64_t n, int64_t d, dpmean_dataset** out) {
  return guarded([&] {
    if (out == nullptr) throw dpmean::ConfigError("NULL pointer argument");
    *out = new dpmean_dataset{dpmean::gen_line(n, static_cast<int>(d))};
  });
}

int dpmean_dataset_mnist(const char* images_path, const char* labels_path,
                         int digit, dpmean_dataset** out) {
  return guarded([&] {
    if (images_path == nullptr || labels_path == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    *out = new dpmean_dataset{dpmean::load_mnist(images_path, labels_path, digit)};
  });
}

void dpmean_dataset_free(dpmean_dataset* dataset) { delete dataset; }

int64_t dpmean_dataset_n(const dpmean_dataset* dataset) {
  return dataset ? dataset->data.n() : 0;
}

int64_t dpmean_dataset_d(const dpmean_dataset* dataset) {
  return dataset ? dataset->data.dim() : 0;
}

int64_t dpmean_dataset_universe(const dpmean_dataset* dataset) {
  return dataset ? dataset->data.universe() : 0;
}

int dpmean_shifted_clipped_mean(const dpmean_dataset* dataset, double rho,
                                double beta, uint64_t seed, int noise_enabled,
                                dpmean_result** out) {
  return guarded([&] {
    if (dataset == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    const dpmean::RandomSource source(seed, noise_enabled != 0);
    *out = wrap_estimate(
        dpmean::shifted_clipped_mean(dataset->data, rho, beta, source));
  });
}

int dpmean_clipped_mean_auto(const dpmean_dataset* dataset, double rho,
                             double beta, uint64_t seed, int noise_enabled,
                             dpmean_result** out) {
  return guarded([&] {
    if (dataset == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    const dpmean::RandomSource source(seed, noise_enabled != 0);
    dpmean::Rng rng = source.stream("auto-noise");
    *out = wrap_estimate(
        dpmean::clipped_mean_auto(dataset->data, rho, beta, rng));
  });
}

int dpmean_local_mean(const dpmean_dataset* dataset, double rho, double beta,
                      uint64_t seed, int noise_enabled, dpmean_result** out) {
  return guarded([&] {
    if (dataset == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    const dpmean::RandomSource source(seed, noise_enabled != 0);
    *out = wrap_estimate(dpmean::ldp_pipeline(dataset->data, rho, beta, source));
  });
}

int dpmean_shuffle_mean(const dpmean_dataset* dataset, double epsilon,
                        double delta, double beta, uint64_t seed,
                        int noise_enabled, dpmean_result** out) {
  return guarded([&] {
    if (dataset == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    const dpmean::RandomSource source(seed, noise_enabled != 0);
    *out = wrap_estimate(
        dpmean::shuffle_pipeline(dataset->data, epsilon, delta, beta, source));
  });
}

int64_t dpmean_result_dim(const dpmean_result* result) {
  return result ? static_cast<int64_t>(result->value.size()) : 0;
}

int dpmean_result_values(const dpmean_result* result, double* out, int64_t len) {
  return guarded([&] {
    if (result == nullptr || out == nullptr) {
      throw dpmean::ConfigError("NULL pointer argument");
    }
    if (len < static_cast<int64_t>(result->value.size())) {
      throw dpmean::ConfigError("output buffer too small");
    }
    std::copy(result->value.begin(), result->value.end(), out);
  });
}

double dpmean_result_clip_threshold(const dpmean_result* result) {
  return result ? result->clip_threshold : 0.0;
}

int64_t dpmean_result_clip_rank(const dpmean_result* result) {
  return result ? result->clip_rank : 0;
}

int dpmean_result_fallback_zero(const dpmean_result* result) {
  return result ? result->fallback_zero : 0;
}

int dpmean_result_ledger_closed(const dpmean_result* result) {
  return result ? result->ledger_closed : 0;
}

void dpmean_result_free(dpmean_result* result) { delete result; }

void dpmean_experiment_config_init(dpmean_experiment_config* config) {
  if (config == nullptr) return;
  std::memset(config, 0, sizeof(*config));
  config->model = "central";
  config->estimator = "shifted-cm";
  config->n = 4000;
  config->d = 128;
  config->rho = 0.5;
  config->epsilon = 1.0;
  config->delta = 1e-9;
  config->data = "gaussian";
  config->mu_scale = 0.0;
  config->kappa = 1.0;
  config->range_r = 0.0;
  config->digit = -1;
  config->trials = 100;
  config->trim = 0.1;
  config->seed = 1;
  config->sigma_min = 0.1;
  config->beta = 0.1;
}

int dpmean_run_experiment(const dpmean_experiment_config* config,
                          double* trimmed_l2_out) {
  return guarded([&] {
    const std::vector<dpmean::ExperimentRow> rows =
        dpmean::run_experiment(to_config(config));
    if (trimmed_l2_out != nullptr) {
      *trimmed_l2_out = rows.empty() ? 0.0 : rows.front().value;
    }
  });
}

int dpmean_sweep_quantile(const dpmean_experiment_config* config, int points,
                          double* chosen_error_out, double* min_error_out) {
  return guarded([&] {
    dpmean::ExperimentConfig cfg = to_config(config);
    cfg.data.kind = dpmean::DataSpec::Kind::kLine;
    cfg.validate();
    const dpmean::Dataset line = dpmean::gen_line(cfg.n, cfg.d);
    const dpmean::RandomSource source(cfg.seed);
    const dpmean::QuantileSweepResult sweep = dpmean::sweep_quantile(
        line, cfg.rho, cfg.trials, cfg.trim, points, source);
    if (chosen_error_out != nullptr) *chosen_error_out = sweep.chosen_error;
    if (min_error_out != nullptr) {
      *min_error_out = *std::min_element(sweep.errors.begin(), sweep.errors.end());
    }
    if (!cfg.out_path.empty()) {
      dpmean::write_csv(cfg.out_path, dpmean::sweep_rows(cfg, sweep));
    }
  });
}

}  // extern "C"
