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
#include <memory>
#include <vector>

#include "dpmean/random.hpp"

namespace dpmean {

// Pluggable noisy interval-count interface over a domain [0, u]. The
// quantile search below only issues prefix queries [0, mid], but
// implementations answer general intervals.
class RangeCountOracle {
 public:
  virtual ~RangeCountOracle() = default;

  virtual double noisy_count(std::int64_t lo, std::int64_t hi) = 0;
  virtual std::int64_t universe() const = 0;
  virtual int max_queries() const = 0;
  virtual int queries_used() const = 0;
  // Bound tau such that every answer this oracle gives is within tau of the
  // truth with probability 1 - beta.
  virtual double error_bound(double beta) const = 0;
};

struct QuantileResult {
  std::int64_t value = 0;
  int queries_used = 0;
  double tau_bound = 0.0;
};

// Number of binary-search iterations over [0, u]: ceil(log2(u + 1)).
int quantile_iterations(std::int64_t u);

// Rank-error bound of the central-model quantile search: per-query noise
// std sqrt(L / (2 rho)) over L iterations, all within tau with probability
// 1 - beta by a Gaussian union bound.
double rank_error_bound(std::int64_t u, double rho, double beta);

// Binary-search quantile selection. Returns a value v with
// x_(m - tau) <= v <= x_(m + tau) whenever every oracle answer is within
// tau of the true count (sentinels x_(j) = 0 for j < 1, = u for j > n).
QuantileResult priv_quantile(RangeCountOracle& oracle, std::int64_t m,
                             double beta = 0.1);

// Central-model oracle: exact count plus N(0, L / (2 rho_total)) per query,
// the Gaussian mechanism at sensitivity 1 and per-query budget rho/L.
// Issuing more than L queries is a hard failure.
class CentralRangeCountOracle : public RangeCountOracle {
 public:
  CentralRangeCountOracle(std::vector<std::int64_t> values, std::int64_t universe,
                          double rho_total, Rng rng);

  double noisy_count(std::int64_t lo, std::int64_t hi) override;
  std::int64_t universe() const override { return universe_; }
  int max_queries() const override { return max_queries_; }
  int queries_used() const override { return queries_used_; }
  double error_bound(double beta) const override;

  double per_query_sigma() const { return sigma_; }
  double rho_total() const { return rho_total_; }

 private:
  std::vector<std::int64_t> sorted_;
  std::int64_t universe_;
  double rho_total_;
  double sigma_;
  int max_queries_;
  int queries_used_ = 0;
  Rng rng_;
};

}  // namespace dpmean
