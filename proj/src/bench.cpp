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

#include "dpmean/bench.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "dpmean/central.hpp"
#include "dpmean/errors.hpp"
#include "dpmean/local.hpp"
#include "dpmean/mechanisms.hpp"
#include "dpmean/shuffle.hpp"
#include "dpmean/transform.hpp"

namespace dpmean {
namespace {

// Local and shuffle runs quantize with bucket sigma_min (alpha =
// sigma_min sqrt(d)) instead of the central model's sigma_min sqrt(d/n):
// range-count noise in those models dwarfs sub-sigma resolution, and the
// coarser grid keeps the hierarchy depth (hence the rank margin the noise
// forces) small.
constexpr bool kLdpCoarseGrid = true;

double l2_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double v = a[j] - b[j];
    s += v * v;
  }
  return std::sqrt(s);
}

std::vector<double> column_mean(const RealMatrix& m) {
  std::vector<double> mean(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) mean[j] += r[j];
  }
  for (double& v : mean) v /= static_cast<double>(m.rows);
  return mean;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct PreparedData {
  Dataset ds;
  QuantizationGrid grid;
  double r_prime = 0.0;
};

// Clip samples to the R' ball and quantize; coarse = true floors the
// bucket at sigma_min.
PreparedData prepare_samples(const RealMatrix& samples,
                             const ExperimentConfig& cfg, bool coarse) {
  const std::int64_t n = static_cast<std::int64_t>(samples.rows);
  const int d = static_cast<int>(samples.cols);
  const double r = cfg.resolved_range();
  const double sigma_max = r / std::sqrt(static_cast<double>(d));
  const double r_prime =
      gaussian_mean_clip_radius(r, sigma_max, d, n, cfg.beta);

  RealMatrix clipped(samples.rows, samples.cols);
  for (std::size_t i = 0; i < samples.rows; ++i) {
    const std::vector<double> row = clip_l2(samples.row(i), r_prime);
    std::copy(row.begin(), row.end(), clipped.row(i).begin());
  }

  double alpha =
      cfg.sigma_min * std::sqrt(static_cast<double>(d) / static_cast<double>(n));
  if (coarse) {
    alpha = std::max(alpha, cfg.sigma_min * std::sqrt(static_cast<double>(d)));
  }
  QuantizationGrid grid = QuantizationGrid::make(r_prime, alpha, d);
  Dataset ds(quantize(clipped, grid), grid.u);
  return PreparedData{std::move(ds), grid, r_prime};
}

std::vector<double> dequantize_estimate(const std::vector<double>& value,
                                        const QuantizationGrid& grid,
                                        bool fallback) {
  std::vector<double> out(value.size(), 0.0);
  if (fallback) return out;  // zero in the original data space
  for (std::size_t j = 0; j < value.size(); ++j) {
    out[j] = grid.dequantize_value(value[j]);
  }
  return out;
}

std::vector<double> run_gaussian_estimator(const ExperimentConfig& cfg,
                                           const RealMatrix& samples,
                                           const RandomSource& tsrc) {
  const std::int64_t n = static_cast<std::int64_t>(samples.rows);
  const int d = static_cast<int>(samples.cols);
  if (cfg.estimator == EstimatorKind::kNonprivate) return column_mean(samples);

  if (cfg.model == Model::kCentral) {
    switch (cfg.estimator) {
      case EstimatorKind::kShiftedCm: {
        GaussianMeanParams params;
        params.range_bound = cfg.resolved_range();
        params.sigma_min = cfg.sigma_min;
        params.sigma_max = params.range_bound / std::sqrt(static_cast<double>(d));
        params.rho = cfg.rho;
        params.beta = cfg.beta;
        MeanEstimate est = gaussian_mean(samples, params, tsrc);
        if (est.fallback_zero) return std::vector<double>(d, 0.0);
        return est.value;
      }
      case EstimatorKind::kCm: {
        // Re-center by the public grid midpoint so the norms the
        // threshold sees track the data location, not the grid offset.
        PreparedData prep = prepare_samples(samples, cfg, false);
        const std::int64_t c0 =
            std::llround(prep.r_prime / prep.grid.bucket);
        IntMatrix recentered = prep.ds.matrix();
        for (std::int64_t& v : recentered.values) v -= c0;
        const std::int64_t coord_bound =
            std::max<std::int64_t>(std::max(c0, prep.grid.u - c0), 1);
        Rng rng = tsrc.stream("cm-noise");
        MeanEstimate est = clipped_mean_auto_signed(recentered, coord_bound,
                                                    cfg.rho, cfg.beta, rng);
        std::vector<double> out(est.value.size());
        for (std::size_t j = 0; j < est.value.size(); ++j) {
          out[j] = prep.grid.dequantize_value(est.value[j] +
                                              static_cast<double>(c0));
        }
        return out;
      }
      case EstimatorKind::kNaiveGaussian: {
        PreparedData prep = prepare_samples(samples, cfg, false);
        const std::vector<double> fq = prep.ds.exact_mean();
        const double gs = std::sqrt(static_cast<double>(d)) *
                          static_cast<double>(prep.grid.u) /
                          static_cast<double>(n);
        Rng rng = tsrc.stream("naive-noise");
        const std::vector<double> noisy =
            gaussian_mechanism(fq, gs, cfg.rho, rng);
        std::vector<double> out(noisy.size());
        for (std::size_t j = 0; j < noisy.size(); ++j) {
          out[j] = prep.grid.dequantize_value(noisy[j]);
        }
        return out;
      }
      default:
        break;
    }
  } else if (cfg.estimator == EstimatorKind::kShiftedCm) {
    PreparedData prep = prepare_samples(samples, cfg, kLdpCoarseGrid);
    if (cfg.model == Model::kLocal) {
      MeanEstimate est = ldp_pipeline(prep.ds, cfg.rho, cfg.beta, tsrc);
      return dequantize_estimate(est.value, prep.grid, est.fallback_zero);
    }
    MeanEstimate est =
        shuffle_pipeline(prep.ds, cfg.epsilon, cfg.delta, cfg.beta, tsrc);
    return dequantize_estimate(est.value, prep.grid, est.fallback_zero);
  }
  throw ConfigError("estimator not supported for model " + to_string(cfg.model));
}

std::vector<double> run_integer_estimator(const ExperimentConfig& cfg,
                                          const Dataset& ds,
                                          const RandomSource& tsrc) {
  if (cfg.estimator == EstimatorKind::kNonprivate) return ds.exact_mean();

  if (cfg.model == Model::kCentral) {
    switch (cfg.estimator) {
      case EstimatorKind::kShiftedCm: {
        MeanEstimate est = shifted_clipped_mean(ds, cfg.rho, cfg.beta, tsrc);
        return est.value;
      }
      case EstimatorKind::kCm: {
        Rng rng = tsrc.stream("cm-noise");
        return clipped_mean_auto(ds, cfg.rho, cfg.beta, rng).value;
      }
      case EstimatorKind::kNaiveGaussian: {
        const double gs = std::sqrt(static_cast<double>(ds.dim())) *
                          static_cast<double>(ds.universe()) /
                          static_cast<double>(ds.n());
        Rng rng = tsrc.stream("naive-noise");
        return gaussian_mechanism(ds.exact_mean(), gs, cfg.rho, rng);
      }
      default:
        break;
    }
  } else if (cfg.estimator == EstimatorKind::kShiftedCm) {
    if (cfg.model == Model::kLocal) {
      return ldp_pipeline(ds, cfg.rho, cfg.beta, tsrc).value;
    }
    return shuffle_pipeline(ds, cfg.epsilon, cfg.delta, cfg.beta, tsrc).value;
  }
  throw ConfigError("estimator not supported for model " + to_string(cfg.model));
}

// Trials are independent given their substreams; results land in
// preallocated slots so scheduling cannot affect the output.
template <typename Fn>
void parallel_trials(int trials, Fn&& fn) {
  const unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()),
      static_cast<unsigned>(trials));
  if (workers <= 1) {
    for (int t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
        try {
          fn(t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string trials_path(const std::string& path) {
  const std::string suffix = ".csv";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return path.substr(0, path.size() - suffix.size()) + ".trials.csv";
  }
  return path + ".trials.csv";
}

void write_row_prefix(std::ofstream& out, const ExperimentConfig& cfg,
                      const std::string& estimator_label) {
  const bool shuffle = cfg.model == Model::kShuffle;
  const bool gaussian = cfg.data.kind == DataSpec::Kind::kGaussian;
  out << to_string(cfg.model) << ',' << estimator_label << ',' << cfg.n << ','
      << cfg.d << ',' << format_double(shuffle ? 0.0 : cfg.rho) << ','
      << format_double(shuffle ? cfg.epsilon : 0.0) << ','
      << format_double(shuffle ? cfg.delta : 0.0) << ','
      << format_double(gaussian ? cfg.data.mu_scale : 0.0) << ','
      << format_double(gaussian ? cfg.data.kappa : 0.0) << ','
      << format_double(gaussian ? cfg.resolved_range() : 0.0) << ','
      << cfg.trials << ',' << format_double(cfg.trim) << ',' << cfg.seed;
}

}  // namespace

std::string to_string(Model model) {
  switch (model) {
    case Model::kCentral: return "central";
    case Model::kLocal: return "local";
    case Model::kShuffle: return "shuffle";
  }
  return "central";
}

std::string to_string(EstimatorKind estimator) {
  switch (estimator) {
    case EstimatorKind::kShiftedCm: return "shifted-cm";
    case EstimatorKind::kCm: return "cm";
    case EstimatorKind::kNaiveGaussian: return "naive-gaussian";
    case EstimatorKind::kNonprivate: return "nonprivate";
  }
  return "shifted-cm";
}

Model parse_model(const std::string& name) {
  if (name == "central") return Model::kCentral;
  if (name == "local") return Model::kLocal;
  if (name == "shuffle") return Model::kShuffle;
  throw ConfigError("unknown model: " + name);
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "shifted-cm") return EstimatorKind::kShiftedCm;
  if (name == "cm") return EstimatorKind::kCm;
  if (name == "naive-gaussian") return EstimatorKind::kNaiveGaussian;
  if (name == "nonprivate") return EstimatorKind::kNonprivate;
  throw ConfigError("unknown estimator: " + name);
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (d < 1) throw ConfigError("d must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(trim >= 0.0) || !(trim < 0.5)) throw ConfigError("trim must be in [0, 0.5)");
  if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("beta must be in (0,1)");
  if (model == Model::kShuffle) {
    if (!(epsilon > 0.0)) throw ConfigError("shuffle model requires epsilon > 0");
    if (!(delta > 0.0) || !(delta < 1.0)) {
      throw ConfigError("shuffle model requires delta in (0,1)");
    }
  } else if (!(rho > 0.0)) {
    throw ConfigError("central/local models require rho > 0");
  }
  if (data.kind == DataSpec::Kind::kGaussian) {
    if (!(data.kappa >= 1.0)) throw ConfigError("kappa must be >= 1");
    if (!(sigma_min > 0.0)) throw ConfigError("sigma_min must be > 0");
    if (data.range_r < 0.0) throw ConfigError("range R must be >= 0");
  }
  if (data.kind == DataSpec::Kind::kMnist &&
      (data.images_path.empty() || data.labels_path.empty())) {
    throw ConfigError("mnist data requires images and labels paths");
  }
}

double ExperimentConfig::resolved_range() const {
  if (data.range_r > 0.0) return data.range_r;
  return 50.0 * std::sqrt(static_cast<double>(d));
}

GaussianModel GaussianModel::make(int d, std::span<const double> mu,
                                  double kappa, Rng& rng) {
  if (d < 1) throw ConfigError("gaussian model requires d >= 1");
  if (!(kappa >= 1.0)) throw ConfigError("gaussian model requires kappa >= 1");
  GaussianModel model;
  model.mu_.assign(mu.begin(), mu.end());
  if (static_cast<int>(model.mu_.size()) != d) {
    throw ConfigError("gaussian model: mu dimension mismatch");
  }
  model.lambda_.assign(d, 1.0);
  if (kappa > 1.0) {
    for (double& l : model.lambda_) l = 1.0 + (kappa - 1.0) * rng.uniform();
    // Haar rotation: QR of a Gaussian matrix with the R diagonal's signs
    // folded into Q.
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    model.rotation_ = RealMatrix(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) model.rotation_.at(i, j) = q(i, j);
    }
  }
  return model;
}

RealMatrix GaussianModel::sample(std::int64_t n, Rng& rng) const {
  const int d = static_cast<int>(mu_.size());
  RealMatrix out(n, d);
  for (std::int64_t i = 0; i < n; ++i) {
    auto row = out.row(static_cast<std::size_t>(i));
    for (int j = 0; j < d; ++j) row[j] = rng.normal();
  }
  if (rotation_.rows != 0) {
    // x = mu + A Lambda^{1/2} A^T z
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        a(rotation_.values.data(), d, d);
    Eigen::VectorXd sqrt_lambda(d);
    for (int j = 0; j < d; ++j) sqrt_lambda(j) = std::sqrt(lambda_[j]);
    const Eigen::MatrixXd m = a * sqrt_lambda.asDiagonal() * a.transpose();
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>
        z(out.values.data(), static_cast<Eigen::Index>(n), d);
    z = z * m.transpose();
  }
  for (std::int64_t i = 0; i < n; ++i) {
    auto row = out.row(static_cast<std::size_t>(i));
    for (int j = 0; j < d; ++j) row[j] += mu_[j];
  }
  return out;
}

double GaussianModel::mahalanobis_error(std::span<const double> estimate) const {
  const int d = static_cast<int>(mu_.size());
  std::vector<double> diff(d);
  for (int j = 0; j < d; ++j) diff[j] = estimate[j] - mu_[j];
  if (rotation_.rows == 0) {
    double s = 0.0;
    for (double v : diff) s += v * v;
    return std::sqrt(s);
  }
  // || Lambda^{-1/2} A^T (est - mu) ||
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    double w = 0.0;
    for (int i = 0; i < d; ++i) w += rotation_.at(i, j) * diff[i];
    s += w * w / lambda_[j];
  }
  return std::sqrt(s);
}

RealMatrix gen_gaussian(std::int64_t n, int d, std::span<const double> mu,
                        double kappa, Rng& rng) {
  const GaussianModel model = GaussianModel::make(d, mu, kappa, rng);
  return model.sample(n, rng);
}

Dataset gen_line(std::int64_t n, int d) {
  if (n < 1 || d < 1) throw ConfigError("gen_line requires n, d >= 1");
  IntMatrix rows(n, d);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) rows.at(i, j) = i + 1;
  }
  return Dataset(std::move(rows), n);
}

double trimmed_mean(std::vector<double> values, double trim) {
  if (!(trim >= 0.0) || !(trim < 0.5)) throw ConfigError("trim must be in [0, 0.5)");
  if (values.empty()) throw DataError("trimmed_mean of an empty list");
  const std::size_t k = values.size();
  const std::size_t drop = static_cast<std::size_t>(
      std::floor(trim * static_cast<double>(k)));
  if (2 * drop >= k) throw DataError("trimmed_mean: nothing left after trim");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (std::size_t i = drop; i < k - drop; ++i) sum += values[i];
  return sum / static_cast<double>(k - 2 * drop);
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const RandomSource root(config.seed);

  std::vector<std::string> metrics;
  metrics.emplace_back("l2");
  if (config.data.kind == DataSpec::Kind::kGaussian) {
    metrics.emplace_back("mahalanobis");
  }
  std::vector<std::vector<double>> trial_values(
      metrics.size(), std::vector<double>(config.trials, 0.0));

  // Fixed datasets load/build once; gaussian data is redrawn per trial.
  std::optional<Dataset> fixed;
  std::vector<double> fixed_mean;
  ExperimentConfig reported = config;
  if (config.data.kind == DataSpec::Kind::kLine) {
    fixed.emplace(gen_line(config.n, config.d));
  } else if (config.data.kind == DataSpec::Kind::kMnist) {
    fixed.emplace(load_mnist(config.data.images_path, config.data.labels_path,
                             config.data.digit));
    // The file defines the shape; echo it rather than the config defaults.
    reported.n = fixed->n();
    reported.d = static_cast<int>(fixed->dim());
  }
  if (fixed.has_value()) fixed_mean = fixed->exact_mean();

  parallel_trials(config.trials, [&](int t) {
    const RandomSource tsrc = root.subsource("trial", t);
    if (config.data.kind == DataSpec::Kind::kGaussian) {
      Rng data_rng = tsrc.stream("data-generation");
      const std::vector<double> mu(config.d, config.data.mu_scale);
      const GaussianModel model =
          GaussianModel::make(config.d, mu, config.data.kappa, data_rng);
      const RealMatrix samples = model.sample(config.n, data_rng);
      const std::vector<double> empirical = column_mean(samples);
      const std::vector<double> estimate =
          run_gaussian_estimator(config, samples, tsrc);
      trial_values[0][t] = l2_dist(estimate, empirical);
      trial_values[1][t] = model.mahalanobis_error(estimate);
    } else {
      const std::vector<double> estimate =
          run_integer_estimator(config, *fixed, tsrc);
      trial_values[0][t] = l2_dist(estimate, fixed_mean);
    }
  });

  std::vector<ExperimentRow> rows;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    ExperimentRow row;
    row.config = reported;
    row.estimator_label = to_string(config.estimator);
    row.metric = metrics[m];
    row.value = trimmed_mean(trial_values[m], config.trim);
    row.trial_values = std::move(trial_values[m]);
    rows.push_back(std::move(row));
  }
  if (!config.out_path.empty()) write_csv(config.out_path, rows);
  return rows;
}

void write_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << "model,estimator,n,d,rho,epsilon,delta,mu_scale,kappa,R,trials,trim,"
         "seed,metric,value\n";
  for (const ExperimentRow& row : rows) {
    write_row_prefix(out, row.config, row.estimator_label);
    out << ',' << row.metric << ',' << format_double(row.value) << '\n';
  }

  std::ofstream trials(trials_path(path), std::ios::binary);
  if (!trials) throw DataError("cannot open output file: " + trials_path(path));
  trials << "model,estimator,n,d,rho,epsilon,delta,mu_scale,kappa,R,trials,"
            "trim,seed,metric,trial,value\n";
  for (const ExperimentRow& row : rows) {
    for (std::size_t t = 0; t < row.trial_values.size(); ++t) {
      write_row_prefix(trials, row.config, row.estimator_label);
      trials << ',' << row.metric << ',' << t << ','
             << format_double(row.trial_values[t]) << '\n';
    }
  }
}

QuantileSweepResult sweep_quantile(const Dataset& data, double rho, int trials,
                                   double trim, int points,
                                   const RandomSource& source) {
  if (points < 2) throw ConfigError("sweep needs at least 2 points");
  if (trials < 1) throw ConfigError("sweep needs at least 1 trial");
  const std::int64_t n = data.n();
  const std::int64_t d = data.dim();

  // Rows sorted by norm; prefix sums of rows and unit rows give the
  // clipped sum at any order-statistic threshold in O(d).
  std::vector<double> norms(n);
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t v : data.row(i)) {
      s += static_cast<double>(v) * static_cast<double>(v);
    }
    norms[i] = std::sqrt(s);
  }
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return norms[a] < norms[b];
  });
  std::vector<double> sorted_norms(n);
  for (std::int64_t i = 0; i < n; ++i) sorted_norms[i] = norms[order[i]];

  RealMatrix prefix_rows(n + 1, d);
  RealMatrix prefix_units(n + 1, d);
  for (std::int64_t k = 0; k < n; ++k) {
    auto src = data.row(static_cast<std::size_t>(order[k]));
    const double norm = sorted_norms[k];
    for (std::int64_t j = 0; j < d; ++j) {
      const double v = static_cast<double>(src[j]);
      prefix_rows.at(k + 1, j) = prefix_rows.at(k, j) + v;
      prefix_units.at(k + 1, j) =
          prefix_units.at(k, j) + (norm > 0.0 ? v / norm : 0.0);
    }
  }
  const std::vector<double> exact_mean = data.exact_mean();

  const auto clipped_bias = [&](double c) {
    // Rows with norm <= c are unchanged; the rest are scaled to norm c.
    const std::int64_t below = static_cast<std::int64_t>(
        std::upper_bound(sorted_norms.begin(), sorted_norms.end(), c) -
        sorted_norms.begin());
    std::vector<double> bias(d);
    for (std::int64_t j = 0; j < d; ++j) {
      const double clipped_sum =
          prefix_rows.at(below, j) +
          c * (prefix_units.at(n, j) - prefix_units.at(below, j));
      bias[j] = clipped_sum / static_cast<double>(n) - exact_mean[j];
    }
    return bias;
  };

  QuantileSweepResult result;
  for (int k = 1; k <= points; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(points);
    result.rank_fractions.push_back(f);
    result.ranks.push_back(std::max<std::int64_t>(
        1, std::llround(f * static_cast<double>(n))));
  }
  result.chosen_rank = std::clamp<std::int64_t>(
      n - std::llround(std::sqrt(2.0 * static_cast<double>(d) / rho)), 1, n);

  std::vector<std::vector<double>> biases;
  std::vector<double> thresholds;
  for (std::int64_t rank : result.ranks) {
    thresholds.push_back(sorted_norms[rank - 1]);
    biases.push_back(clipped_bias(thresholds.back()));
  }
  const double chosen_c = sorted_norms[result.chosen_rank - 1];
  const std::vector<double> chosen_bias = clipped_bias(chosen_c);

  // Common random numbers: the same standard normal vector drives every
  // threshold within a trial.
  std::vector<std::vector<double>> errors(result.ranks.size());
  std::vector<double> chosen_errors;
  std::vector<double> z(d);
  for (int t = 0; t < trials; ++t) {
    Rng rng = source.stream("sweep-noise", t);
    for (std::int64_t j = 0; j < d; ++j) z[j] = rng.normal();
    for (std::size_t k = 0; k < result.ranks.size(); ++k) {
      const double sigma = gaussian_mechanism_sigma(
          2.0 * thresholds[k] / static_cast<double>(n), rho);
      double s = 0.0;
      for (std::int64_t j = 0; j < d; ++j) {
        const double v = biases[k][j] + sigma * z[j];
        s += v * v;
      }
      errors[k].push_back(std::sqrt(s));
    }
    const double sigma = gaussian_mechanism_sigma(
        2.0 * chosen_c / static_cast<double>(n), rho);
    double s = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const double v = chosen_bias[j] + sigma * z[j];
      s += v * v;
    }
    chosen_errors.push_back(std::sqrt(s));
  }

  for (auto& e : errors) result.errors.push_back(trimmed_mean(std::move(e), trim));
  result.chosen_error = trimmed_mean(std::move(chosen_errors), trim);
  return result;
}

std::vector<ExperimentRow> sweep_rows(const ExperimentConfig& config,
                                      const QuantileSweepResult& sweep) {
  std::vector<ExperimentRow> rows;
  for (std::size_t k = 0; k < sweep.ranks.size(); ++k) {
    ExperimentRow row;
    row.config = config;
    char label[32];
    std::snprintf(label, sizeof(label), "cm@q%.2f", sweep.rank_fractions[k]);
    row.estimator_label = label;
    row.metric = "l2";
    row.value = sweep.errors[k];
    rows.push_back(std::move(row));
  }
  ExperimentRow chosen;
  chosen.config = config;
  chosen.estimator_label = "cm@chosen";
  chosen.metric = "l2";
  chosen.value = sweep.chosen_error;
  rows.push_back(std::move(chosen));
  return rows;
}

}  // namespace dpmean
