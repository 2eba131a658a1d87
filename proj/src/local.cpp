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

#include "dpmean/local.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dpmean/errors.hpp"
#include "dpmean/mechanisms.hpp"
#include "dpmean/transform.hpp"

namespace dpmean {
namespace {

double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Number of depth-k cells intersecting [0, u].
std::int64_t cells_at_depth(std::int64_t u, int levels, int depth) {
  const std::int64_t width = std::int64_t{1} << (levels - depth);
  return u / width + 1;
}

}  // namespace

UserSumReport ldp_sum_randomize(std::span<const double> x, double c, double rho,
                                Rng& rng) {
  if (!(c >= 0.0)) throw ConfigError("ldp_sum_randomize requires C >= 0");
  if (l2_norm(x) > c + 1e-9) {
    throw DataError("ldp_sum_randomize: input norm exceeds the clip bound");
  }
  return UserSumReport{gaussian_mechanism(x, 2.0 * c, rho, rng)};
}

int hierarchy_levels(std::int64_t u) { return quantile_iterations(u); }

HierarchicalReport ldp_hierarchy_randomize(std::int64_t value, std::int64_t u,
                                           double rho, Rng& rng) {
  if (value < 0 || value > u) {
    throw DataError("ldp_hierarchy_randomize: value outside [0, u]");
  }
  if (!(rho > 0.0)) throw ConfigError("ldp_hierarchy_randomize requires rho > 0");
  const int levels = hierarchy_levels(u);
  const double cell_sigma = std::sqrt(static_cast<double>(levels) / rho);
  HierarchicalReport report;
  report.universe = u;
  report.levels.resize(levels);
  for (int k = 1; k <= levels; ++k) {
    auto& cells = report.levels[k - 1];
    cells.assign(cells_at_depth(u, levels, k), 0.0);
    cells[value >> (levels - k)] = 1.0;
    for (double& cell : cells) cell += rng.noise(cell_sigma);
  }
  return report;
}

double ldp_range_error_bound(std::int64_t u, std::int64_t n, double rho,
                             double beta) {
  const double l = static_cast<double>(hierarchy_levels(u));
  const double query_sigma = l * std::sqrt(2.0 * static_cast<double>(n) / rho);
  return query_sigma *
         std::sqrt(2.0 * std::log(4.0 * static_cast<double>(u) * l / beta));
}

double ldp_range_noise_scale(std::int64_t u, std::int64_t n, double rho) {
  const double l = static_cast<double>(hierarchy_levels(u));
  return l * std::sqrt(static_cast<double>(n) / rho);
}

LdpRangeStructure::LdpRangeStructure(std::int64_t u, std::int64_t n, double rho,
                                     Rng rng)
    : universe_(u),
      n_(n),
      rho_(rho),
      levels_count_(hierarchy_levels(u)),
      rng_(std::move(rng)) {}

LdpRangeStructure LdpRangeStructure::simulate(std::vector<std::int64_t> values,
                                              std::int64_t u, double rho,
                                              Rng rng) {
  if (!(rho > 0.0)) throw ConfigError("range structure requires rho > 0");
  LdpRangeStructure s(u, static_cast<std::int64_t>(values.size()), rho,
                      std::move(rng));
  s.simulated_ = true;
  s.sorted_ = std::move(values);
  std::sort(s.sorted_.begin(), s.sorted_.end());
  if (!s.sorted_.empty() && (s.sorted_.front() < 0 || s.sorted_.back() > u)) {
    throw DataError("range structure: values outside [0, u]");
  }
  return s;
}

double LdpRangeStructure::node_count(int depth, std::int64_t index) {
  if (!simulated_) return dense_[depth - 1][index];
  const std::int64_t width = std::int64_t{1} << (levels_count_ - depth);
  const std::int64_t lo = index * width;
  const std::int64_t hi = lo + width - 1;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), lo);
  const auto last = std::upper_bound(sorted_.begin(), sorted_.end(), hi);
  const double exact = static_cast<double>(last - first);
  const auto key = std::make_pair(depth, index);
  auto it = noise_cache_.find(key);
  if (it == noise_cache_.end()) {
    const double sigma = std::sqrt(static_cast<double>(n_) *
                                   static_cast<double>(levels_count_) / rho_);
    it = noise_cache_.emplace(key, rng_.noise(sigma)).first;
  }
  return exact + it->second;
}

double LdpRangeStructure::range_query(std::int64_t a, std::int64_t b) {
  if (a < 0 || b > universe_ || a > b) {
    throw ConfigError("range_query: interval outside [0, u]");
  }
  double total = 0.0;
  std::int64_t lo = a;
  const std::int64_t top_width = std::int64_t{1} << (levels_count_ - 1);
  while (lo <= b) {
    std::int64_t width = (lo == 0) ? top_width : (lo & -lo);
    if (width > top_width) width = top_width;
    while (width > 1 && lo + width - 1 > b) width >>= 1;
    int w_log = 0;
    while ((std::int64_t{1} << w_log) < width) ++w_log;
    const int depth = levels_count_ - w_log;
    total += node_count(depth, lo / width);
    lo += width;
  }
  return total;
}

LdpAggregator::LdpAggregator(std::int64_t u, double rho)
    : universe_(u), rho_(rho) {
  const int levels = hierarchy_levels(u);
  dense_.resize(levels);
  for (int k = 1; k <= levels; ++k) {
    dense_[k - 1].assign(cells_at_depth(u, levels, k), 0.0);
  }
}

void LdpAggregator::add(const HierarchicalReport& report) {
  if (report.universe != universe_ ||
      report.levels.size() != dense_.size()) {
    throw DataError("aggregator: report shape mismatch");
  }
  for (std::size_t k = 0; k < dense_.size(); ++k) {
    if (report.levels[k].size() != dense_[k].size()) {
      throw DataError("aggregator: level size mismatch");
    }
    for (std::size_t i = 0; i < dense_[k].size(); ++i) {
      dense_[k][i] += report.levels[k][i];
    }
  }
  ++n_;
}

LdpRangeStructure LdpAggregator::build() && {
  LdpRangeStructure s(universe_, n_, rho_, RandomSource(0).stream("unused"));
  s.simulated_ = false;
  s.dense_ = std::move(dense_);
  return s;
}

std::int64_t ldp_quantile_value(LdpRangeStructure& structure, std::int64_t m) {
  const std::int64_t u = structure.universe();
  int block = -1;
  for (int j = 0;; ++j) {
    const std::int64_t hi = std::min((std::int64_t{1} << j) - 1, u);
    if (structure.range_query(0, hi) > static_cast<double>(m)) {
      block = j;
      break;
    }
    if (hi == u) return u;
  }
  if (block <= 0) return 0;
  std::int64_t left = std::int64_t{1} << (block - 1);
  std::int64_t right = std::min((std::int64_t{1} << block) - 1, u);
  while (left < right) {
    const std::int64_t mid = left + (right - left) / 2;
    if (structure.range_query(0, mid) <= static_cast<double>(m)) {
      left = mid + 1;
    } else {
      right = mid;
    }
  }
  return left;
}

LdpRangeStructure build_ldp_structure(std::vector<std::int64_t> values,
                                      std::int64_t universe, double rho,
                                      const RandomSource& source,
                                      std::string_view name, std::uint64_t index,
                                      bool faithful) {
  if (faithful) {
    LdpAggregator agg(universe, rho);
    for (std::size_t i = 0; i < values.size(); ++i) {
      Rng user_rng = source.stream(name, index * values.size() + i);
      agg.add(ldp_hierarchy_randomize(values[i], universe, rho, user_rng));
    }
    return std::move(agg).build();
  }
  return LdpRangeStructure::simulate(std::move(values), universe, rho,
                                     source.stream(name, index));
}

MeanEstimate ldp_pipeline(const Dataset& data, double rho, double beta,
                          const RandomSource& source,
                          const LdpOptions& options) {
  if (!(rho > 0.0)) throw ConfigError("ldp_pipeline requires rho > 0");
  if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("beta must be in (0,1)");
  const std::int64_t n = data.n();
  const std::int64_t d_orig = data.dim();
  const std::int64_t d_pad = next_pow2(d_orig);
  const std::int64_t offset = d_pad * data.universe();
  const std::int64_t med_universe = 2 * offset;
  const internal::NormDomain norm_domain =
      internal::norm_quantile_domain(d_pad, 2 * offset);

  const double rho_med_total = rho / 4.0;
  const double rho_med = rho_med_total / static_cast<double>(d_pad);
  const double rho_thresh = 3.0 * rho / 16.0;
  const double rho_sum = 9.0 * rho / 16.0;

  // Small-n guard, public quantities only: n <= sqrt(2 d n / rho_sum), or
  // per-dimension median counts that cannot be resolved against the
  // round-1 range-count noise.
  const double guard =
      std::max(std::sqrt(2.0 * static_cast<double>(d_pad * n) / rho_sum),
               ldp_range_noise_scale(med_universe, n, rho_med));
  if (static_cast<double>(n) <= guard) {
    PrivacyLedger ledger(PrivacyBudget::zcdp(rho));
    ledger.charge("fallback-zero", BudgetFraction(1));
    MeanEstimate est(std::move(ledger));
    est.value.assign(d_orig, 0.0);
    est.fallback_zero = true;
    return est;
  }

  Rng sign_rng = source.stream("rotation-signs");
  const RotationContext ctx =
      RotationContext::make(static_cast<int>(d_orig), sign_rng);
  IntMatrix rotated(n, d_pad);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::vector<std::int64_t> r = rotate(ctx, data.row(i));
    std::copy(r.begin(), r.end(), rotated.row(i).begin());
  }

  // Round 1: per-dimension medians.
  const std::int64_t m_med = (n + 1) / 2;
  std::vector<std::int64_t> shift(d_pad);
  for (std::int64_t j = 0; j < d_pad; ++j) {
    std::vector<std::int64_t> column(n);
    for (std::int64_t i = 0; i < n; ++i) column[i] = rotated.at(i, j) + offset;
    LdpRangeStructure structure =
        build_ldp_structure(std::move(column), med_universe, rho_med, source,
                            "ldp-median", j, options.faithful_users);
    LdpRangeCountOracle oracle(structure);
    shift[j] = priv_quantile(oracle, m_med, beta).value - offset;
  }

  IntMatrix shifted(n, d_pad);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < d_pad; ++j) {
      shifted.at(i, j) = rotated.at(i, j) - shift[j];
    }
  }

  // Round 2: clip threshold from the squared norms of the shifted rows.
  LdpRangeStructure norm_structure = build_ldp_structure(
      internal::scaled_squared_norms(shifted, norm_domain),
      norm_domain.universe, rho_thresh, source, "ldp-threshold", 0,
      options.faithful_users);
  const double sigma_rc =
      ldp_range_noise_scale(norm_domain.universe, n, rho_thresh);
  const double margin =
      std::max(std::sqrt(2.0 * static_cast<double>(d_pad * n) / rho_sum),
               options.kappa_rank * sigma_rc);
  const std::int64_t m = std::max<std::int64_t>(
      n - static_cast<std::int64_t>(std::ceil(margin)), 1);
  const std::int64_t raw = ldp_quantile_value(
      norm_structure, std::min<std::int64_t>(m, n - 1));
  const double threshold = internal::norm_from_scaled(
      std::max<std::int64_t>(raw, 0), norm_domain.shift);

  // Round 3: per-user Gaussian sum of the clipped shifted vectors.
  std::vector<double> sum(d_pad, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::vector<double> clipped = clip_l2(shifted.row(i), threshold);
    Rng user_rng = source.stream("ldp-sum", i);
    const UserSumReport report =
        ldp_sum_randomize(clipped, threshold, rho_sum, user_rng);
    for (std::int64_t j = 0; j < d_pad; ++j) sum[j] += report.noisy_vector[j];
  }

  std::vector<double> combined(d_pad);
  for (std::int64_t j = 0; j < d_pad; ++j) {
    combined[j] = sum[j] / static_cast<double>(n) + static_cast<double>(shift[j]);
  }

  PrivacyLedger ledger(PrivacyBudget::zcdp(rho));
  for (std::int64_t j = 0; j < d_pad; ++j) {
    ledger.charge("median[" + std::to_string(j) + "]",
                  BudgetFraction(1, 4 * d_pad));
  }
  ledger.charge("clip-threshold", BudgetFraction(3, 16));
  ledger.charge("sum", BudgetFraction(9, 16));

  MeanEstimate est(std::move(ledger));
  est.value = inverse_rotate(ctx, combined);
  est.clip_threshold = threshold;
  est.clip_rank = m;
  est.shift.emplace(shift.begin(), shift.end());
  return est;
}

}  // namespace dpmean
