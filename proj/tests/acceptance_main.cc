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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failed criteria. An optional argument
// restricts the run to a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dpmean/bench.hpp"
#include "dpmean/central.hpp"
#include "dpmean/local.hpp"
#include "dpmean/quantile.hpp"
#include "dpmean/shuffle.hpp"
#include "dpmean/transform.hpp"
#include "test_util.hpp"

namespace dpmean {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  explicit Check(Outcome* out) : out_(out) {}

  template <typename T>
  void expect(bool ok, const char* what, T measured) {
    std::ostringstream os;
    os << what << "=" << measured;
    if (!out_->detail.empty()) out_->detail += ", ";
    out_->detail += os.str();
    if (!ok) {
      out_->pass = false;
      out_->detail += " [VIOLATED]";
    }
  }

 private:
  Outcome* out_;
};

double l2(std::span<const double> a, std::span<const double> b) {
  return testing::l2_dist(a, b);
}

// Quantized i.i.d. N(mu, I_d) rows: coordinate-clamped to [-range, range]
// and mapped onto the integer grid.
struct QuantizedGaussian {
  Dataset data;
  QuantizationGrid grid;
};

QuantizedGaussian quantized_gaussian(std::int64_t n, int d, double mu,
                                     double range, double alpha, Rng& rng) {
  RealMatrix xs(n, d);
  for (auto& v : xs.values) {
    v = std::clamp(mu + rng.normal(), -range, range);
  }
  QuantizationGrid grid = QuantizationGrid::make(range, alpha, d);
  Dataset ds(quantize(xs, grid), grid.u);
  return QuantizedGaussian{std::move(ds), grid};
}

// ---------------------------------------------------------------------
// C1: Monte-Carlo error of the fixed-threshold clipped mean stays below
// the bias/variance functional, for C in {0.5, 1, 2, 4} x median norm.
Outcome c1_clipped_mean_error_bound() {
  Outcome out;
  Check check(&out);
  const RandomSource src(101);
  Rng data_rng = src.stream("data-generation");
  const std::int64_t n = 200;
  const int d = 16;
  const double rho = 1.0;
  const QuantizedGaussian q =
      quantized_gaussian(n, d, 0.0, 8.0, 0.05, data_rng);
  const Dataset& ds = q.data;
  const std::vector<double> exact = ds.exact_mean();

  std::vector<double> norms(n);
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t v : ds.row(i)) {
      s += static_cast<double>(v) * static_cast<double>(v);
    }
    norms[i] = std::sqrt(s);
  }
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  const double median_norm = sorted[n / 2];

  const int trials = 2000;
  for (double mult : {0.5, 1.0, 2.0, 4.0}) {
    const double c = mult * median_norm;
    std::vector<double> errors(trials);
    for (int t = 0; t < trials; ++t) {
      Rng rng = src.stream("noise", static_cast<std::uint64_t>(mult * 100) +
                                        1000 * static_cast<std::uint64_t>(t));
      const MeanEstimate est = clipped_mean(ds, c, rho, rng);
      errors[t] = l2(est.value, exact);
    }
    const double mc = testing::mean(errors);
    const double se = std::sqrt(testing::variance(errors) / trials);
    const double bound = error_functional(ds, c, rho);
    std::ostringstream label;
    label << "mc/bound@" << mult << "x";
    check.expect(mc <= bound + 3.0 * se, label.str().c_str(), mc / bound);
  }
  return out;
}

// C2: the error functional's grid minimizer sits at the
// (n - round(sqrt(2d/rho)))-th norm order statistic (+-1).
Outcome c2_optimal_rank_stationarity() {
  Outcome out;
  Check check(&out);
  const std::int64_t n = 500;
  const int d = 128;
  const Dataset line = gen_line(n, d);
  std::vector<double> norms(n);
  for (std::int64_t i = 0; i < n; ++i) {
    norms[i] = static_cast<double>(i + 1) * std::sqrt(static_cast<double>(d));
  }
  for (double rho : {0.1, 0.5, 1.0}) {
    std::size_t best = 0;
    double best_value = error_functional(line, norms[0], rho);
    for (std::size_t k = 1; k < norms.size(); ++k) {
      const double v = error_functional(line, norms[k], rho);
      if (v < best_value) {
        best_value = v;
        best = k;
      }
    }
    const std::int64_t expected = n - std::llround(std::sqrt(2.0 * d / rho));
    std::ostringstream label;
    label << "rank@rho=" << rho;
    check.expect(std::llabs(static_cast<std::int64_t>(best + 1) - expected) <= 1,
                 label.str().c_str(), best + 1);
  }
  return out;
}

std::int64_t rank_error_about(const std::vector<std::int64_t>& sorted,
                              std::int64_t u, std::int64_t m, std::int64_t v) {
  const std::int64_t n = static_cast<std::int64_t>(sorted.size());
  const std::int64_t r = m + 1;
  const auto order_stat = [&](std::int64_t j) -> std::int64_t {
    if (j < 1) return 0;
    if (j > n) return u;
    return sorted[j - 1];
  };
  for (std::int64_t t = 0;; ++t) {
    if (order_stat(r - t) <= v && v <= order_stat(r + t)) return t;
  }
}

// C3: Monte-Carlo rank error of the quantile search stays below tau with
// failure rate <= beta.
Outcome c3_privquant_rank_error() {
  Outcome out;
  Check check(&out);
  const std::int64_t u = std::int64_t{1} << 16;
  const std::int64_t n = 1000;
  const double rho = 1.0;
  const double beta = 0.1;
  const double tau = rank_error_bound(u, rho, beta);
  const RandomSource src(103);
  Rng data_rng = src.stream("data-generation");
  std::vector<std::int64_t> values(n);
  for (auto& v : values) v = data_rng.uniform_int(0, u);
  std::sort(values.begin(), values.end());

  const int trials = 1000;
  const std::int64_t m = n / 2;
  int exceed = 0;
  for (int t = 0; t < trials; ++t) {
    CentralRangeCountOracle oracle(values, u, rho, src.stream("noise", t));
    const std::int64_t v = priv_quantile(oracle, m).value;
    if (static_cast<double>(rank_error_about(values, u, m, v)) > tau) ++exceed;
  }
  check.expect(exceed <= trials / 10, "exceed_fraction",
               static_cast<double>(exceed) / trials);
  return out;
}

// C4: conditional correctness against every +-tau oracle error pattern.
Outcome c4_adversarial_oracles() {
  Outcome out;
  Check check(&out);

  class AdversarialOracle : public RangeCountOracle {
   public:
    AdversarialOracle(const std::vector<std::int64_t>& sorted, std::int64_t u,
                      double tau, unsigned pattern)
        : sorted_(sorted), u_(u), tau_(tau), pattern_(pattern) {}
    double noisy_count(std::int64_t lo, std::int64_t hi) override {
      const double exact = static_cast<double>(
          std::upper_bound(sorted_.begin(), sorted_.end(), hi) -
          std::lower_bound(sorted_.begin(), sorted_.end(), lo));
      const double sign = (pattern_ >> queries_used_) & 1u ? 1.0 : -1.0;
      ++queries_used_;
      return exact + sign * tau_;
    }
    std::int64_t universe() const override { return u_; }
    int max_queries() const override { return 64; }
    int queries_used() const override { return queries_used_; }
    double error_bound(double) const override { return tau_; }

   private:
    const std::vector<std::int64_t>& sorted_;
    std::int64_t u_;
    double tau_;
    unsigned pattern_;
    int queries_used_ = 0;
  };

  const std::int64_t u = 64;
  const std::int64_t n = 32;
  const RandomSource src(104);
  Rng rng = src.stream("data-generation");
  std::vector<std::vector<std::int64_t>> datasets;
  std::vector<std::int64_t> uniform(n);
  for (std::int64_t i = 0; i < n; ++i) uniform[i] = 2 * i;
  datasets.push_back(uniform);
  std::vector<std::int64_t> clustered(n, 40);
  for (int i = 0; i < 8; ++i) clustered[i] = 3;
  datasets.push_back(clustered);
  std::vector<std::int64_t> random(n);
  for (auto& v : random) v = rng.uniform_int(0, u);
  std::sort(random.begin(), random.end());
  datasets.push_back(random);

  const int l = quantile_iterations(u);
  std::int64_t cases = 0;
  std::int64_t violations = 0;
  for (const auto& data : datasets) {
    for (std::int64_t tau : {0, 1, 3}) {
      for (std::int64_t m = 1; m <= n; ++m) {
        for (unsigned pattern = 0; pattern < (1u << l); ++pattern) {
          AdversarialOracle oracle(data, u, static_cast<double>(tau), pattern);
          const std::int64_t v = priv_quantile(oracle, m).value;
          ++cases;
          if (rank_error_about(data, u, m, v) > tau) ++violations;
        }
      }
    }
  }
  check.expect(violations == 0, "violations", violations);
  check.expect(cases == 3 * 3 * 32 * 128, "cases", cases);
  return out;
}

// C5: with all noise injection disabled (and budgets high enough that the
// rank arithmetic clips nothing), the pipeline reproduces the exact mean.
Outcome c5_zero_noise_oracle() {
  Outcome out;
  Check check(&out);
  const RandomSource data_src(105);
  Rng data_rng = data_src.stream("data-generation");
  double worst_rel = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::int64_t n = 20 + data_rng.uniform_int(0, 180);
    const int d = 1 + static_cast<int>(data_rng.uniform_int(0, 32));
    const std::int64_t u = 3 + data_rng.uniform_int(0, 297);
    const Dataset ds = testing::random_int_dataset(n, d, u, data_rng);
    const RandomSource silent(2000 + k, false);
    const MeanEstimate est = shifted_clipped_mean(ds, 1e12, 0.1, silent);
    if (est.fallback_zero) {
      check.expect(false, "unexpected_fallback", k);
      continue;
    }
    const std::vector<double> exact = ds.exact_mean();
    const double rel =
        l2(est.value, exact) / (1.0 + testing::l2_norm(exact));
    worst_rel = std::max(worst_rel, rel);
  }
  check.expect(worst_rel <= 1e-9, "worst_relative_error", worst_rel);

  double worst_wrapper = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::int64_t n = 50 + data_rng.uniform_int(0, 150);
    const int d = 2 + static_cast<int>(data_rng.uniform_int(0, 15));
    RealMatrix samples(n, d);
    std::vector<double> mu(d);
    for (auto& v : mu) v = 3.0 * (2.0 * data_rng.uniform() - 1.0);
    for (std::int64_t i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        samples.at(i, j) = mu[j] + 0.2 * data_rng.normal();
      }
    }
    GaussianMeanParams params;
    params.range_bound = 3.0 * std::sqrt(static_cast<double>(d)) + 3.0;
    params.sigma_min = 0.1;
    params.sigma_max = 0.25;
    params.rho = 1e12;
    params.beta = 0.1;
    const RandomSource silent(3000 + k, false);
    const MeanEstimate est = gaussian_mean(samples, params, silent);
    std::vector<double> sample_mean(d, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) sample_mean[j] += samples.at(i, j);
    }
    for (auto& v : sample_mean) v /= static_cast<double>(n);
    const double alpha =
        params.sigma_min * std::sqrt(static_cast<double>(d) / static_cast<double>(n));
    const double err = l2(est.value, sample_mean);
    worst_wrapper = std::max(worst_wrapper, err / (alpha / 2.0));
  }
  check.expect(worst_wrapper <= 1.0 + 1e-6, "worst_wrapper_error/half_alpha",
               worst_wrapper);
  return out;
}

// C6: translation invariance of the shifted estimator; the unshifted
// clipped mean degrades as ||mu|| grows.
Outcome c6_translation_invariance() {
  Outcome out;
  Check check(&out);
  std::vector<double> shifted_errors;
  std::vector<double> cm_errors;
  for (double mu : {0.0, 5.0, 10.0}) {
    for (EstimatorKind kind : {EstimatorKind::kShiftedCm, EstimatorKind::kCm}) {
      ExperimentConfig cfg;
      cfg.estimator = kind;
      cfg.n = 2000;
      cfg.d = 64;
      cfg.rho = 0.5;
      cfg.data.mu_scale = mu;
      cfg.trials = 100;
      cfg.trim = 0.1;
      cfg.seed = 106;
      const auto rows = run_experiment(cfg);
      if (kind == EstimatorKind::kShiftedCm) {
        shifted_errors.push_back(rows[0].value);
      } else {
        cm_errors.push_back(rows[0].value);
      }
    }
  }
  const double lo =
      *std::min_element(shifted_errors.begin(), shifted_errors.end());
  const double hi =
      *std::max_element(shifted_errors.begin(), shifted_errors.end());
  check.expect(hi / lo <= 1.15, "shifted_max/min", hi / lo);
  check.expect(cm_errors[0] < cm_errors[1] && cm_errors[1] < cm_errors[2],
               "cm_increasing",
               cm_errors[0] < cm_errors[1] && cm_errors[1] < cm_errors[2]);
  return out;
}

// C7: the theory rank attains the sweep minimum within 1.3x.
Outcome c7_quantile_sweep() {
  Outcome out;
  Check check(&out);
  const RandomSource source(107);
  for (int d : {32, 128, 512}) {
    const Dataset line = gen_line(500, d);
    for (double rho : {0.1, 0.5, 1.0}) {
      const QuantileSweepResult sweep =
          sweep_quantile(line, rho, 100, 0.1, 20, source.subsource("s", d));
      const double min_error =
          *std::min_element(sweep.errors.begin(), sweep.errors.end());
      std::ostringstream label;
      label << "ratio@d=" << d << ",rho=" << rho;
      check.expect(sweep.chosen_error <= 1.3 * min_error, label.str().c_str(),
                   sweep.chosen_error / min_error);
    }
  }
  return out;
}

// C8: every pipeline's ledger closes exactly; overspending aborts.
Outcome c8_ledgers_close() {
  Outcome out;
  Check check(&out);
  const RandomSource data_src(108);
  Rng data_rng = data_src.stream("data-generation");
  const Dataset ds = testing::random_int_dataset(300, 5, 31, data_rng);

  Rng rng = RandomSource(1).stream("noise");
  const MeanEstimate cm = clipped_mean(ds, 10.0, 1.0, rng);
  const MeanEstimate automatic = clipped_mean_auto(ds, 1.0, 0.1, rng);
  const MeanEstimate shifted = shifted_clipped_mean(ds, 1.0, 0.1, RandomSource(2));
  const MeanEstimate local = ldp_pipeline(ds, 8.0, 0.1, RandomSource(3));
  const MeanEstimate shuffle =
      shuffle_pipeline(ds, 2.0, 1e-9, 0.1, RandomSource(4));
  int closed = 0;
  for (const MeanEstimate* est :
       {&cm, &automatic, &shifted, &local, &shuffle}) {
    est->ledger.finalize();
    if (est->ledger.closed()) ++closed;
  }
  check.expect(closed == 5, "pipelines_closed", closed);

  bool aborted = false;
  try {
    PrivacyLedger ledger(PrivacyBudget::zcdp(1.0));
    ledger.charge("a", BudgetFraction(3, 4));
    ledger.charge("b", BudgetFraction(1, 2));
  } catch (const BudgetError&) {
    aborted = true;
  }
  check.expect(aborted, "overspend_aborts", aborted);
  return out;
}

// C9: rotation invariants across padded dimensions 2..1024.
Outcome c9_rotation_invariants() {
  Outcome out;
  Check check(&out);
  const RandomSource src(109);
  Rng data_rng = src.stream("data-generation");
  std::int64_t checked = 0;
  std::int64_t failures = 0;
  for (int log_d = 1; log_d <= 10; ++log_d) {
    const int d = 1 << log_d;
    for (int k = 0; k < 1000; ++k) {
      std::vector<std::int64_t> x(d), y(d);
      for (auto& v : x) v = data_rng.uniform_int(-1000, 1000);
      for (auto& v : y) v = data_rng.uniform_int(-1000, 1000);

      std::vector<std::int64_t> twice = x;
      fwht_inplace(std::span<std::int64_t>(twice));
      fwht_inplace(std::span<std::int64_t>(twice));
      bool ok = true;
      for (int j = 0; j < d; ++j) ok &= twice[j] == d * x[j];

      Rng sign_rng = src.stream("rotation-signs",
                                static_cast<std::uint64_t>(log_d * 10000 + k));
      const RotationContext ctx = RotationContext::make(d, sign_rng);
      const std::vector<std::int64_t> rx = rotate(ctx, x);
      const std::vector<std::int64_t> ry = rotate(ctx, y);
      std::int64_t nx = 0, nrx = 0, dist = 0, rdist = 0;
      for (int j = 0; j < d; ++j) {
        nx += x[j] * x[j];
        nrx += rx[j] * rx[j];
        const std::int64_t dj = x[j] - y[j];
        const std::int64_t rdj = rx[j] - ry[j];
        dist += dj * dj;
        rdist += rdj * rdj;
      }
      ok &= nrx == d * nx;
      ok &= rdist == d * dist;
      ++checked;
      if (!ok) ++failures;
    }
  }
  check.expect(failures == 0, "failures", failures);
  check.expect(checked == 10000, "vectors", checked);
  return out;
}

// C10: LDP calibration — aggregate sum-noise variance and the range-query
// union bound.
Outcome c10_ldp_calibration() {
  Outcome out;
  Check check(&out);
  const RandomSource src(110);
  {
    const double c = 1.5;
    const double rho = 0.8;
    const std::int64_t n = 10000;
    const int aggregates = 8000;
    const std::vector<double> x = {0.0};
    std::vector<double> means(aggregates);
    for (int a = 0; a < aggregates; ++a) {
      Rng rng = src.stream("sum-user", a);
      double sum = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        sum += ldp_sum_randomize(x, c, rho, rng).noisy_vector[0];
      }
      means[a] = sum / static_cast<double>(n);
    }
    const double expected = 2.0 * c * c / (rho * static_cast<double>(n));
    check.expect(std::abs(testing::variance(means) / expected - 1.0) <= 0.05,
                 "sum_variance_ratio", testing::variance(means) / expected);
  }
  {
    const std::int64_t u = 1 << 10;
    const std::int64_t n = 10000;
    const double rho = 1.0;
    const double beta = 0.1;
    const double bound = ldp_range_error_bound(u, n, rho, beta);
    Rng data_rng = src.stream("data-generation");
    std::vector<std::int64_t> values(n);
    for (auto& v : values) v = data_rng.uniform_int(0, u);
    std::vector<std::int64_t> sorted = values;
    std::sort(sorted.begin(), sorted.end());

    const int trials = 200;
    int failures = 0;
    const int levels = hierarchy_levels(u);
    for (int t = 0; t < trials; ++t) {
      LdpRangeStructure s =
          LdpRangeStructure::simulate(values, u, rho, src.stream("sim", t));
      double max_err = 0.0;
      for (int depth = 1; depth <= levels; ++depth) {
        const std::int64_t width = std::int64_t{1} << (levels - depth);
        for (std::int64_t lo = 0; lo <= u; lo += width) {
          const std::int64_t hi = std::min(lo + width - 1, u);
          const double exact = static_cast<double>(
              std::upper_bound(sorted.begin(), sorted.end(), hi) -
              std::lower_bound(sorted.begin(), sorted.end(), lo));
          max_err = std::max(max_err, std::abs(s.range_query(lo, hi) - exact));
        }
      }
      if (max_err > bound) ++failures;
    }
    check.expect(failures <= trials / 10, "dyadic_failures", failures);
  }
  return out;
}

// C11: local-vs-central error ratio tracks the sqrt(n) separation.
// Matched budget rho = 128 with the tight prior R = 5 sqrt(d): at desk
// scale the per-dimension median budget rho/(4d) must resolve counts
// against noise L sqrt(n d / rho), which pins the budget this high.
Outcome c11_ldp_vs_central_scaling() {
  Outcome out;
  Check check(&out);
  for (std::int64_t n : {std::int64_t{1000}, std::int64_t{10000}}) {
    double errors[2];
    for (int which = 0; which < 2; ++which) {
      ExperimentConfig cfg;
      cfg.model = which == 0 ? Model::kCentral : Model::kLocal;
      cfg.estimator = EstimatorKind::kShiftedCm;
      cfg.n = n;
      cfg.d = 8;
      cfg.rho = 128.0;  // matched budgets on both sides
      cfg.data.mu_scale = 0.0;
      cfg.data.range_r = 5.0 * std::sqrt(8.0);
      cfg.trials = 40;
      cfg.trim = 0.1;
      cfg.seed = 111;
      errors[which] = run_experiment(cfg)[0].value;
    }
    const double ratio = errors[1] / errors[0];
    const double root_n = std::sqrt(static_cast<double>(n));
    std::ostringstream label;
    label << "ratio/sqrt(n)@n=" << n;
    check.expect(ratio >= 0.2 * root_n && ratio <= 5.0 * root_n,
                 label.str().c_str(), ratio / root_n);
  }
  return out;
}

// C12: shuffle summation — exactness without noise, MSE under the closed
// form, transcript-permutation invariance.
Outcome c12_shuffle_summation() {
  Outcome out;
  Check check(&out);
  const RandomSource silent(112, false);
  Rng data_rng = RandomSource(113).stream("data-generation");
  {
    int mismatches = 0;
    for (int k = 0; k < 1000; ++k) {
      const std::int64_t n = 2 + data_rng.uniform_int(0, 40);
      const double c = 0.25 + 4.0 * data_rng.uniform();
      const ShuffleParams params = ShuffleParams::make(n, c, 1.0, 1e-9);
      std::vector<std::uint64_t> transcript;
      std::int64_t fixed_sum = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double x = c * (2.0 * data_rng.uniform() - 1.0);
        fixed_sum += std::llround(params.scale * (x + c));
        Rng rng = silent.stream("encode", static_cast<std::uint64_t>(k) * 64 + i);
        const auto shares = shuffle_encode_1d(x, params, rng);
        transcript.insert(transcript.end(), shares.begin(), shares.end());
      }
      const double expected = static_cast<double>(fixed_sum) /
                                  (params.scale * static_cast<double>(n)) -
                              c;
      if (shuffle_decode_1d(transcript, params) != expected) ++mismatches;
    }
    check.expect(mismatches == 0, "noiseless_mismatches", mismatches);
  }
  {
    const std::int64_t n = 500;
    const double c = 1.0;
    const double eps = 1.0;
    const ShuffleParams params = ShuffleParams::make(n, c, eps, 1e-9);
    const RandomSource src(114);
    std::vector<double> values(n);
    double true_mean = 0.0;
    for (auto& v : values) {
      v = c * (2.0 * data_rng.uniform() - 1.0);
      true_mean += v;
    }
    true_mean /= static_cast<double>(n);
    const int trials = 2000;
    std::vector<double> sq_errors(trials);
    std::vector<std::uint64_t> transcript;
    for (int t = 0; t < trials; ++t) {
      transcript.clear();
      const RandomSource tsrc = src.subsource("trial", t);
      for (std::int64_t i = 0; i < n; ++i) {
        Rng rng = tsrc.stream("encode", i);
        const auto shares = shuffle_encode_1d(values[i], params, rng);
        transcript.insert(transcript.end(), shares.begin(), shares.end());
      }
      const double err = shuffle_decode_1d(transcript, params) - true_mean;
      sq_errors[t] = err * err;
    }
    const double mse = testing::mean(sq_errors);
    const double se = std::sqrt(testing::variance(sq_errors) / trials);
    const double c_impl =
        params.mse_bound() * std::pow(eps * n / c, 2.0);  // recorded constant
    check.expect(mse <= params.mse_bound() + 3.0 * se, "mse/bound",
                 mse / params.mse_bound());
    check.expect(c_impl > 0.0, "c_impl", c_impl);

    // Permutation invariance on the last transcript.
    const double before = shuffle_decode_1d(transcript, params);
    Rng shuffler = src.stream("shuffler");
    std::shuffle(transcript.begin(), transcript.end(), shuffler.engine());
    check.expect(shuffle_decode_1d(transcript, params) == before,
                 "permutation_invariant",
                 shuffle_decode_1d(transcript, params) == before);
  }
  return out;
}

// C13: statistical wrapper vs the non-private sample mean, and flatness
// in the prior bound R.
Outcome c13_gaussian_wrapper() {
  Outcome out;
  Check check(&out);
  const int d = 32;
  const double root_d = std::sqrt(static_cast<double>(d));

  const auto run = [&](EstimatorKind kind, double r) {
    ExperimentConfig cfg;
    cfg.estimator = kind;
    cfg.n = 4000;
    cfg.d = d;
    cfg.rho = 0.5;
    cfg.data.range_r = r;
    cfg.trials = 100;
    cfg.trim = 0.1;
    cfg.seed = 113;
    const auto rows = run_experiment(cfg);
    return rows[1].value;  // mahalanobis (= statistical l2 for Sigma = I)
  };

  const double nonprivate = run(EstimatorKind::kNonprivate, 50.0 * root_d);
  std::vector<double> wrapper_errors;
  for (double r : {10.0 * root_d, 50.0 * root_d, 200.0 * root_d}) {
    wrapper_errors.push_back(run(EstimatorKind::kShiftedCm, r));
  }
  check.expect(wrapper_errors[1] <= 5.0 * nonprivate, "error/nonprivate",
               wrapper_errors[1] / nonprivate);
  const double lo =
      *std::min_element(wrapper_errors.begin(), wrapper_errors.end());
  const double hi =
      *std::max_element(wrapper_errors.begin(), wrapper_errors.end());
  check.expect(hi / lo <= 2.0, "R_sensitivity_max/min", hi / lo);
  return out;
}

struct CriterionEntry {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

const CriterionEntry kCriteria[] = {
    {1, "clipped-mean Monte Carlo error within the bias/variance bound",
     c1_clipped_mean_error_bound},
    {2, "error-functional minimizer at the optimal clipping rank",
     c2_optimal_rank_stationarity},
    {3, "quantile search rank error within tau", c3_privquant_rank_error},
    {4, "quantile search correct under adversarial bounded-error oracles",
     c4_adversarial_oracles},
    {5, "zero-noise pipelines reproduce the exact mean", c5_zero_noise_oracle},
    {6, "shifted estimator is translation invariant; plain clipped mean is not",
     c6_translation_invariance},
    {7, "chosen clipping rank attains the sweep optimum", c7_quantile_sweep},
    {8, "privacy ledgers close exactly in every model", c8_ledgers_close},
    {9, "rotation involution, norm and distance preservation",
     c9_rotation_invariants},
    {10, "LDP sum-noise and range-query calibration", c10_ldp_calibration},
    {11, "local-vs-central error ratio tracks sqrt(n)",
     c11_ldp_vs_central_scaling},
    {12, "shuffle summation exactness, MSE bound, permutation invariance",
     c12_shuffle_summation},
    {13, "Gaussian statistical wrapper accuracy, flat in R",
     c13_gaussian_wrapper},
};

}  // namespace
}  // namespace dpmean

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const auto& criterion : dpmean::kCriteria) {
    if (only != 0 && criterion.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    dpmean::Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] C%d: %s (%s) [%.1fs]\n", outcome.pass ? "PASS" : "FAIL",
                criterion.id, criterion.title, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
