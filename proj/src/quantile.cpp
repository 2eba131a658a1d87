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
#include <utility>

#include "dpmean/errors.hpp"

namespace dpmean {

int quantile_iterations(std::int64_t u) {
  if (u < 1) throw ConfigError("quantile universe must be >= 1");
  int l = 0;
  // Smallest l with 2^l >= u + 1.
  while ((std::int64_t{1} << l) < u + 1) ++l;
  return l;
}

double rank_error_bound(std::int64_t u, double rho, double beta) {
  if (!(rho > 0.0)) throw ConfigError("rank_error_bound requires rho > 0");
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw ConfigError("rank_error_bound requires beta in (0,1)");
  }
  const double l = static_cast<double>(quantile_iterations(u));
  const double sigma = std::sqrt(l / (2.0 * rho));
  return sigma * std::sqrt(2.0 * std::log(l / beta));
}

QuantileResult priv_quantile(RangeCountOracle& oracle, std::int64_t m,
                             double beta) {
  if (m < 0) throw ConfigError("priv_quantile requires m >= 0");
  std::int64_t left = 0;
  std::int64_t right = oracle.universe();
  while (left < right) {
    const std::int64_t mid = left + (right - left) / 2;
    const double c = oracle.noisy_count(0, mid);
    if (c <= static_cast<double>(m)) {
      left = mid + 1;
    } else {
      right = mid;
    }
  }
  QuantileResult result;
  result.value = (left + right) / 2;
  result.queries_used = oracle.queries_used();
  result.tau_bound = oracle.error_bound(beta);
  return result;
}

CentralRangeCountOracle::CentralRangeCountOracle(std::vector<std::int64_t> values,
                                                 std::int64_t universe,
                                                 double rho_total, Rng rng)
    : sorted_(std::move(values)),
      universe_(universe),
      rho_total_(rho_total),
      max_queries_(quantile_iterations(universe)),
      rng_(std::move(rng)) {
  if (!(rho_total > 0.0)) throw ConfigError("range-count oracle requires rho > 0");
  std::sort(sorted_.begin(), sorted_.end());
  if (!sorted_.empty() && (sorted_.front() < 0 || sorted_.back() > universe_)) {
    throw DataError("range-count oracle: values outside [0, u]");
  }
  // Noise is calibrated to the declared iteration count even if the search
  // exits early, matching the fixed per-iteration budget rho / L.
  sigma_ = std::sqrt(static_cast<double>(max_queries_) / (2.0 * rho_total_));
}

double CentralRangeCountOracle::noisy_count(std::int64_t lo, std::int64_t hi) {
  if (queries_used_ >= max_queries_) {
    throw BudgetError("range-count oracle: query budget exhausted");
  }
  ++queries_used_;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), lo);
  const auto last = std::upper_bound(sorted_.begin(), sorted_.end(), hi);
  const double exact = static_cast<double>(last - first);
  return exact + rng_.noise(sigma_);
}

double CentralRangeCountOracle::error_bound(double beta) const {
  return rank_error_bound(universe_, rho_total_, beta);
}

}  // namespace dpmean
