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

#include "dpmean/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpmean/errors.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace dpmean {
namespace {

// Minimal rank error t such that x_(r-t) <= v <= x_(r+t) about the
// search's target rank r = m + 1 (the loop returns the smallest value
// whose prefix count exceeds m), with sentinels x_(j) = 0 for j < 1 and
// x_(j) = u for j > n. Brute force by construction.
std::int64_t rank_error(const std::vector<std::int64_t>& sorted, std::int64_t u,
                        std::int64_t m, std::int64_t v) {
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

Rng noiseless_rng() { return RandomSource(0, false).stream("oracle"); }

TEST(QuantileIterationsTest, MatchesCeilLog2) {
  EXPECT_EQ(quantile_iterations(1), 1);
  EXPECT_EQ(quantile_iterations(2), 2);
  EXPECT_EQ(quantile_iterations(3), 2);
  EXPECT_EQ(quantile_iterations(128), 8);
  EXPECT_EQ(quantile_iterations((std::int64_t{1} << 16)), 17);
}

TEST(RankErrorBoundTest, MatchesClosedForm) {
  // u = 2^16 (L = 17), rho = 1, beta = 0.1:
  // sqrt(17/2) * sqrt(2 ln 170) = 9.3439...
  EXPECT_NEAR(rank_error_bound(std::int64_t{1} << 16, 1.0, 0.1),
              9.343905683912613, 1e-12);
}

TEST(RankErrorBoundTest, VanishesWithLargeRho) {
  EXPECT_LT(rank_error_bound(1 << 16, 1e12, 0.1), 1e-4);
}

TEST(RankErrorBoundTest, ScalesAsInverseSqrtRho) {
  const double t1 = rank_error_bound(1 << 10, 1.0, 0.1);
  const double t2 = rank_error_bound(1 << 10, 2.0, 0.1);
  EXPECT_NEAR(t1 / t2, std::sqrt(2.0), 1e-12);
}

TEST(PrivQuantileTest, NoiselessHandTrace) {
  // D = {1..100}, m = 50, u = 128: the smallest v with count >= 51 is 51.
  std::vector<std::int64_t> values(100);
  for (int i = 0; i < 100; ++i) values[i] = i + 1;
  CentralRangeCountOracle oracle(values, 128, 1.0, noiseless_rng());
  EXPECT_EQ(priv_quantile(oracle, 50).value, 51);
}

TEST(PrivQuantileTest, PointMassReturnsThePoint) {
  for (std::int64_t m : {1, 5, 17, 20}) {
    std::vector<std::int64_t> values(20, 7);
    CentralRangeCountOracle oracle(values, 100, 1.0, noiseless_rng());
    const std::int64_t v = priv_quantile(oracle, std::min<std::int64_t>(m, 19)).value;
    EXPECT_EQ(v, 7) << "m=" << m;
  }
}

TEST(PrivQuantileTest, UsesAtMostDeclaredIterations) {
  for (std::int64_t u : {1, 2, 3, 7, 100, 128, 65536}) {
    for (std::int64_t m : {1, 2, 50}) {
      std::vector<std::int64_t> values = {0, u / 3, u / 2, u};
      CentralRangeCountOracle oracle(values, u, 1.0, noiseless_rng());
      const QuantileResult r = priv_quantile(oracle, m);
      EXPECT_LE(r.queries_used, quantile_iterations(u));
      EXPECT_GE(r.value, 0);
      EXPECT_LE(r.value, u);
    }
  }
}

TEST(PrivQuantileTest, NoiselessIsMonotoneInRank) {
  const RandomSource src(17);
  Rng rng = src.stream("data-generation");
  std::vector<std::int64_t> values(200);
  for (auto& v : values) v = rng.uniform_int(0, 1024);
  std::int64_t prev = -1;
  for (std::int64_t m = 1; m <= 200; m += 7) {
    CentralRangeCountOracle oracle(values, 1024, 1.0, noiseless_rng());
    const std::int64_t v = priv_quantile(oracle, m).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(CentralOracleTest, NoiselessCountsAreExact) {
  std::vector<std::int64_t> values = {5, 5, 9};
  CentralRangeCountOracle oracle(values, 16, 1.0, noiseless_rng());
  EXPECT_DOUBLE_EQ(oracle.noisy_count(0, 16), 3.0);
  EXPECT_DOUBLE_EQ(oracle.noisy_count(0, 6), 2.0);
  EXPECT_DOUBLE_EQ(oracle.noisy_count(6, 16), 1.0);
}

TEST(CentralOracleTest, ExhaustsQueryBudget) {
  std::vector<std::int64_t> values = {1, 2, 3};
  CentralRangeCountOracle oracle(values, 7, 1.0, noiseless_rng());
  for (int i = 0; i < oracle.max_queries(); ++i) oracle.noisy_count(0, 3);
  EXPECT_THROW(oracle.noisy_count(0, 3), BudgetError);
}

TEST(CentralOracleTest, PerQueryNoiseVarianceMatchesBudget) {
  // Variance L / (2 rho) per query, empirically within 3% at 1e5 draws.
  const std::int64_t u = 1 << 10;  // L = 11
  const double rho = 0.7;
  const RandomSource src(123);
  const std::size_t samples = 100000;
  std::vector<double> noise;
  noise.reserve(samples);
  std::vector<std::int64_t> values = {100, 200, 300};
  const int l = quantile_iterations(u);
  std::size_t produced = 0;
  for (std::uint64_t batch = 0; produced < samples; ++batch) {
    CentralRangeCountOracle oracle(values, u, rho, src.stream("noise", batch));
    for (int q = 0; q < l && produced < samples; ++q, ++produced) {
      noise.push_back(oracle.noisy_count(0, u) - 3.0);
    }
  }
  const double expected = static_cast<double>(l) / (2.0 * rho);
  EXPECT_NEAR(testing::variance(noise) / expected, 1.0, 0.03);
}

// Conditional correctness against adversarial oracles: whenever every
// answer errs by at most tau, the returned value's rank error is at most
// tau. Exhaustive over all +-tau error sign patterns.
TEST(PrivQuantileTest, AdversarialBoundedErrorOracle) {
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
  const RandomSource src(5);
  Rng rng = src.stream("data-generation");
  std::vector<std::vector<std::int64_t>> datasets;
  {
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
  }

  const int l = quantile_iterations(u);  // 7 queries -> 128 sign patterns
  for (const auto& data : datasets) {
    for (std::int64_t tau : {0, 1, 3}) {
      for (std::int64_t m : {std::int64_t{1}, n / 4, n / 2, n - 1, n}) {
        for (unsigned pattern = 0; pattern < (1u << l); ++pattern) {
          AdversarialOracle oracle(data, u, static_cast<double>(tau), pattern);
          const std::int64_t v = priv_quantile(oracle, m).value;
          EXPECT_LE(rank_error(data, u, m, v), tau)
              << "m=" << m << " tau=" << tau << " pattern=" << pattern;
        }
      }
    }
  }
}

// Monte Carlo: empirical rank error exceeds the tau bound in at most a
// beta fraction of trials (u = 2^16, n = 1000 uniform, rho = 1).
TEST(PrivQuantileTest, GaussianNoiseRankErrorWithinBound) {
  const std::int64_t u = std::int64_t{1} << 16;
  const std::int64_t n = 1000;
  const double rho = 1.0;
  const double beta = 0.1;
  const double tau = rank_error_bound(u, rho, beta);
  const RandomSource src(2026);
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
    if (static_cast<double>(rank_error(values, u, m, v)) > tau) ++exceed;
  }
  EXPECT_LE(static_cast<double>(exceed) / trials, beta);
}

TEST(PrivQuantileTest, TauBoundReportedFromOracle) {
  std::vector<std::int64_t> values = {1, 2, 3};
  CentralRangeCountOracle oracle(values, 1 << 16, 1.0, noiseless_rng());
  const QuantileResult r = priv_quantile(oracle, 2, 0.1);
  EXPECT_NEAR(r.tau_bound, 9.343905683912613, 1e-12);
}

}  // namespace
}  // namespace dpmean
