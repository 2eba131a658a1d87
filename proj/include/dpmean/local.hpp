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
#include <map>
#include <span>
#include <vector>

#include "dpmean/central.hpp"
#include "dpmean/dataset.hpp"
#include "dpmean/quantile.hpp"
#include "dpmean/random.hpp"

namespace dpmean {

struct UserSumReport {
  std::vector<double> noisy_vector;
};

// Per-user Gaussian-sum report: x + noise of variance (2C)^2 / (2 rho)
// per coordinate (sensitivity 2C between any two inputs in the C-ball).
UserSumReport ldp_sum_randomize(std::span<const double> x, double c, double rho,
                                Rng& rng);

// L = ceil(log2(u+1)): depth of the binary hierarchy over [0, u].
int hierarchy_levels(std::int64_t u);

// One user's randomized report: for each depth k = 1..L the one-hot
// indicator of the value's ancestor cell, plus per-cell Gaussian noise of
// variance L/rho (per-level sensitivity sqrt(2), per-level budget rho/L).
struct HierarchicalReport {
  std::int64_t universe = 0;
  std::vector<std::vector<double>> levels;  // levels[k-1] holds depth k
};

HierarchicalReport ldp_hierarchy_randomize(std::int64_t value, std::int64_t u,
                                           double rho, Rng& rng);

// High-probability bound on any range-query error: <= 2L canonical nodes
// per query, node noise variance n L / rho, union tail over the 4 u L / beta
// events.
double ldp_range_error_bound(std::int64_t u, std::int64_t n, double rho,
                             double beta);

// Typical prefix-query noise scale L sqrt(n / rho) (no union tail); this is
// what rank arithmetic at desk scale has to budget for.
double ldp_range_noise_scale(std::int64_t u, std::int64_t n, double rho);

// Aggregated noisy hierarchy answering arbitrary range-count queries.
// Two constructions with identical output distribution:
//  - aggregate: sums explicit per-user reports (O(u) memory per level);
//  - simulate: exact counts plus lazily sampled aggregate noise
//    N(0, n L / rho) per touched node, for universes where dense
//    histograms are infeasible.
class LdpRangeStructure {
 public:
  static LdpRangeStructure simulate(std::vector<std::int64_t> values,
                                    std::int64_t u, double rho, Rng rng);

  double range_query(std::int64_t a, std::int64_t b);

  std::int64_t universe() const { return universe_; }
  std::int64_t n() const { return n_; }
  double rho() const { return rho_; }
  int levels() const { return levels_count_; }

 private:
  friend class LdpAggregator;
  LdpRangeStructure(std::int64_t u, std::int64_t n, double rho, Rng rng);

  double node_count(int depth, std::int64_t index);

  std::int64_t universe_;
  std::int64_t n_;
  double rho_;
  int levels_count_;
  bool simulated_ = false;
  std::vector<std::vector<double>> dense_;       // aggregate mode
  std::vector<std::int64_t> sorted_;             // simulate mode
  std::map<std::pair<int, std::int64_t>, double> noise_cache_;
  Rng rng_;
};

// Streaming aggregation of per-user reports.
class LdpAggregator {
 public:
  LdpAggregator(std::int64_t u, double rho);
  void add(const HierarchicalReport& report);
  LdpRangeStructure build() &&;

 private:
  std::int64_t universe_;
  double rho_;
  std::int64_t n_ = 0;
  std::vector<std::vector<double>> dense_;
};

// Adapts the structure to the quantile search. Queries are free once the
// structure is built (the budget was spent in the reports), so there is no
// query cap.
class LdpRangeCountOracle : public RangeCountOracle {
 public:
  explicit LdpRangeCountOracle(LdpRangeStructure& structure)
      : structure_(structure) {}

  double noisy_count(std::int64_t lo, std::int64_t hi) override {
    ++queries_used_;
    return structure_.range_query(lo, hi);
  }
  std::int64_t universe() const override { return structure_.universe(); }
  int max_queries() const override { return 1 << 30; }
  int queries_used() const override { return queries_used_; }
  double error_bound(double beta) const override {
    return ldp_range_error_bound(structure_.universe(), structure_.n(),
                                 structure_.rho(), beta);
  }

 private:
  LdpRangeStructure& structure_;
  int queries_used_ = 0;
};

// Quantile of the structure's values at rank target m (smallest v whose
// prefix count exceeds m), evaluated in two stages: a dyadic scan of
// single-node prefixes [0, 2^j - 1] locates the block containing the
// target, then the binary search runs inside that block. Deep prefix
// decompositions carry up to L node noises; confining the search keeps a
// noisy comparison far above the data from pushing the result to the
// universe scale. Noiseless behavior matches priv_quantile exactly.
std::int64_t ldp_quantile_value(LdpRangeStructure& structure, std::int64_t m);

// Builds a range structure either from explicit per-user reports
// (faithful) or by distribution-identical aggregate sampling. Per-user
// streams are derived as (name, index * values.size() + i).
LdpRangeStructure build_ldp_structure(std::vector<std::int64_t> values,
                                      std::int64_t universe, double rho,
                                      const RandomSource& source,
                                      std::string_view name, std::uint64_t index,
                                      bool faithful);

struct LdpOptions {
  // Simulate each user's hierarchical report explicitly instead of
  // sampling the distribution-identical aggregate (only feasible for
  // small universes).
  bool faithful_users = false;
  // Extra clip-rank margin in units of the round-2 range-count noise
  // scale; keeps the threshold search inside the data range when the
  // noise dwarfs the theoretical rank margin.
  double kappa_rank = 1.0;
};

// 3-round local-model pipeline: hierarchical medians (rho/4 over
// dimensions), hierarchical clip threshold (3 rho/16), Gaussian sum
// reports (9 rho/16).
MeanEstimate ldp_pipeline(const Dataset& data, double rho, double beta,
                          const RandomSource& source,
                          const LdpOptions& options = {});

}  // namespace dpmean
