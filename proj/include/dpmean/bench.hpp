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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpmean/dataset.hpp"
#include "dpmean/matrix.hpp"
#include "dpmean/random.hpp"

namespace dpmean {

enum class Model { kCentral, kLocal, kShuffle };
enum class EstimatorKind { kShiftedCm, kCm, kNaiveGaussian, kNonprivate };

std::string to_string(Model model);
std::string to_string(EstimatorKind estimator);
Model parse_model(const std::string& name);
EstimatorKind parse_estimator(const std::string& name);

struct DataSpec {
  enum class Kind { kGaussian, kLine, kMnist };
  Kind kind = Kind::kGaussian;
  double mu_scale = 0.0;  // mu = mu_scale * 1_d
  double kappa = 1.0;     // condition of Sigma(kappa); 1 = identity
  double range_r = 0.0;   // a-priori bound R; 0 = default 50 sqrt(d)
  int digit = -1;         // MNIST digit filter; -1 keeps all
  std::string images_path;
  std::string labels_path;
};

struct ExperimentConfig {
  Model model = Model::kCentral;
  EstimatorKind estimator = EstimatorKind::kShiftedCm;
  std::int64_t n = 4000;
  int d = 128;
  double rho = 0.5;
  double epsilon = 1.0;
  double delta = 1e-9;
  DataSpec data;
  int trials = 100;
  double trim = 0.1;
  std::uint64_t seed = 1;
  std::string out_path;
  double sigma_min = 0.1;
  double beta = 0.1;

  void validate() const;
  double resolved_range() const;  // range_r, defaulted to 50 sqrt(d)
};

struct ExperimentRow {
  ExperimentConfig config;
  std::string estimator_label;  // usually to_string(config.estimator)
  std::string metric;           // "l2" or "mahalanobis"
  double value = 0.0;
  std::vector<double> trial_values;
};

// Multivariate Gaussian N(mu, Sigma(kappa)) with Sigma = A Lambda A^T,
// Lambda uniform in [1, kappa] per coordinate, A Haar-random.
class GaussianModel {
 public:
  static GaussianModel make(int d, std::span<const double> mu, double kappa,
                            Rng& rng);

  RealMatrix sample(std::int64_t n, Rng& rng) const;
  double mahalanobis_error(std::span<const double> estimate) const;
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& eigenvalues() const { return lambda_; }

 private:
  std::vector<double> mu_;
  RealMatrix rotation_;         // empty when Sigma is the identity
  std::vector<double> lambda_;  // diagonal variances
};

RealMatrix gen_gaussian(std::int64_t n, int d, std::span<const double> mu,
                        double kappa, Rng& rng);

// Rows i * 1_d for i in [1, n]; universe u = n.
Dataset gen_line(std::int64_t n, int d);

// IDX-format MNIST loader; pixel values are rescaled from [0, 255] to
// [0, 1020] (times 4) over universe u = 2^10.
Dataset load_mnist(const std::string& images_path, const std::string& labels_path,
                   int digit);

double trimmed_mean(std::vector<double> values, double trim);

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

void write_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

struct QuantileSweepResult {
  std::vector<double> rank_fractions;
  std::vector<std::int64_t> ranks;
  std::vector<double> errors;     // trimmed l2 error at each rank
  std::int64_t chosen_rank = 0;   // n - round(sqrt(2d/rho))
  double chosen_error = 0.0;
};

// Error of the fixed-threshold clipped mean when C is the rank-th norm
// order statistic, swept over `points` evenly spaced rank fractions with
// common random numbers across ranks.
QuantileSweepResult sweep_quantile(const Dataset& data, double rho, int trials,
                                   double trim, int points,
                                   const RandomSource& source);

std::vector<ExperimentRow> sweep_rows(const ExperimentConfig& config,
                                      const QuantileSweepResult& sweep);

}  // namespace dpmean
