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

// Benchmark driver over the C API. Exit codes: 0 success, 2 configuration
// error, 3 data error, 1 anything else.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "dpmean.h"

namespace {

struct Options {
  std::int64_t n = 4000;
  std::int64_t d = 128;
  double rho = 0.5;
  double eps = 1.0;
  double delta = 1e-9;
  double mu_scale = 0.0;
  double kappa = 1.0;
  double range_r = 0.0;
  int trials = 100;
  double trim = 0.1;
  std::uint64_t seed = 1;
  std::string out;
  std::string estimator = "shifted-cm";
  std::string data = "gaussian";
  int digit = -1;
  std::string images;
  std::string labels;
  double sigma_min = 0.1;
  double beta = 0.1;
  int points = 20;
};

void add_common_flags(CLI::App* sub, Options* opts) {
  sub->add_option("--n", opts->n, "number of input vectors");
  sub->add_option("--d", opts->d, "dimension");
  sub->add_option("--rho", opts->rho, "zCDP budget (central/local)");
  sub->add_option("--eps", opts->eps, "epsilon (shuffle)");
  sub->add_option("--delta", opts->delta, "delta (shuffle)");
  sub->add_option("--mu-scale", opts->mu_scale, "mean is mu-scale * 1_d");
  sub->add_option("--kappa", opts->kappa, "covariance condition number");
  sub->add_option("--range-r", opts->range_r, "a-priori bound R (0: 50 sqrt(d))");
  sub->add_option("--trials", opts->trials, "Monte Carlo trials");
  sub->add_option("--trim", opts->trim, "trimming fraction");
  sub->add_option("--seed", opts->seed, "master seed");
  sub->add_option("--out", opts->out, "CSV output path");
  sub->add_option("--estimator", opts->estimator,
                  "shifted-cm | cm | naive-gaussian | nonprivate");
  sub->add_option("--digit", opts->digit, "MNIST digit filter (-1: all)");
  sub->add_option("--sigma-min", opts->sigma_min, "lower bound on sigma");
  sub->add_option("--beta", opts->beta, "failure probability");
}

int status_to_exit(int status) {
  switch (status) {
    case DPMEAN_OK: return 0;
    case DPMEAN_CONFIG_ERROR: return 2;
    case DPMEAN_DATA_ERROR: return 3;
    default: return 1;
  }
}

int run(const Options& opts, const std::string& model, const std::string& data) {
  dpmean_experiment_config cfg;
  dpmean_experiment_config_init(&cfg);
  cfg.model = model.c_str();
  cfg.estimator = opts.estimator.c_str();
  cfg.n = opts.n;
  cfg.d = opts.d;
  cfg.rho = opts.rho;
  cfg.epsilon = opts.eps;
  cfg.delta = opts.delta;
  cfg.data = data.c_str();
  cfg.mu_scale = opts.mu_scale;
  cfg.kappa = opts.kappa;
  cfg.range_r = opts.range_r;
  cfg.digit = opts.digit;
  cfg.mnist_images = opts.images.empty() ? nullptr : opts.images.c_str();
  cfg.mnist_labels = opts.labels.empty() ? nullptr : opts.labels.c_str();
  cfg.trials = opts.trials;
  cfg.trim = opts.trim;
  cfg.seed = opts.seed;
  cfg.out_path = opts.out.empty() ? nullptr : opts.out.c_str();
  cfg.sigma_min = opts.sigma_min;
  cfg.beta = opts.beta;

  double trimmed_l2 = 0.0;
  const int status = dpmean_run_experiment(&cfg, &trimmed_l2);
  if (status != DPMEAN_OK) {
    std::fprintf(stderr, "error: %s\n", dpmean_last_error());
    return status_to_exit(status);
  }
  std::printf("%s %s n=%lld d=%lld trials=%d trimmed_l2=%.8g\n", model.c_str(),
              opts.estimator.c_str(), static_cast<long long>(opts.n),
              static_cast<long long>(opts.d), opts.trials, trimmed_l2);
  if (!opts.out.empty()) std::printf("wrote %s\n", opts.out.c_str());
  return 0;
}

int run_sweep(const Options& opts) {
  dpmean_experiment_config cfg;
  dpmean_experiment_config_init(&cfg);
  cfg.model = "central";
  cfg.estimator = "cm";
  cfg.data = "line";
  cfg.n = opts.n;
  cfg.d = opts.d;
  cfg.rho = opts.rho;
  cfg.trials = opts.trials;
  cfg.trim = opts.trim;
  cfg.seed = opts.seed;
  cfg.out_path = opts.out.empty() ? nullptr : opts.out.c_str();

  double chosen = 0.0;
  double sweep_min = 0.0;
  const int status = dpmean_sweep_quantile(&cfg, opts.points, &chosen, &sweep_min);
  if (status != DPMEAN_OK) {
    std::fprintf(stderr, "error: %s\n", dpmean_last_error());
    return status_to_exit(status);
  }
  std::printf("sweep-quantile n=%lld d=%lld rho=%g chosen=%.8g sweep_min=%.8g "
              "ratio=%.4f\n",
              static_cast<long long>(opts.n), static_cast<long long>(opts.d),
              opts.rho, chosen, sweep_min, chosen / sweep_min);
  if (!opts.out.empty()) std::printf("wrote %s\n", opts.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private mean estimation benchmark harness"};
  app.require_subcommand(1);

  Options opts;
  CLI::App* central = app.add_subcommand("central", "central-model experiment");
  CLI::App* local = app.add_subcommand("local", "local-model experiment");
  CLI::App* shuffle = app.add_subcommand("shuffle", "shuffle-model experiment");
  CLI::App* sweep =
      app.add_subcommand("sweep-quantile", "clip-rank sweep on the line dataset");
  CLI::App* mnist = app.add_subcommand("mnist", "central-model MNIST experiment");

  for (CLI::App* sub : {central, local, shuffle, mnist}) {
    add_common_flags(sub, &opts);
    sub->add_option("--data", opts.data, "gaussian | line");
  }
  add_common_flags(sweep, &opts);
  sweep->add_option("--points", opts.points, "ranks in the sweep");
  mnist->add_option("--images", opts.images, "IDX images file")->required();
  mnist->add_option("--labels", opts.labels, "IDX labels file")->required();

  // Line and sweep defaults mirror the synthetic-dataset experiments.
  sweep->parse_complete_callback([&] {
    if (!sweep->count("--n")) opts.n = 500;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sweep->parsed()) return run_sweep(opts);
  if (central->parsed()) return run(opts, "central", opts.data);
  if (local->parsed()) return run(opts, "local", opts.data);
  if (shuffle->parsed()) return run(opts, "shuffle", opts.data);
  if (mnist->parsed()) return run(opts, "central", "mnist");
  return 2;
}
