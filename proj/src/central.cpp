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

#include "dpmean/central.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpmean/errors.hpp"
#include "dpmean/mechanisms.hpp"

namespace dpmean {
namespace {

double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double l2_norm(std::span<const std::int64_t> x) {
  double s = 0.0;
  for (std::int64_t v : x) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

std::vector<std::int64_t> squared_norms(const IntMatrix& rows) {
  std::vector<std::int64_t> out(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    std::int64_t s = 0;
    for (std::int64_t v : rows.row(i)) s += v * v;
    out[i] = s;
  }
  return out;
}

void check_positive_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be > 0");
}

void check_beta(double beta) {
  if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("beta must be in (0,1)");
}

}  // namespace

std::vector<double> clip_l2(std::span<const double> x, double c) {
  if (!(c >= 0.0)) throw ConfigError("clip threshold must be >= 0");
  const double norm = l2_norm(x);
  const double factor = (norm > c && norm > 0.0) ? c / norm : 1.0;
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] * factor;
  return out;
}

std::vector<double> clip_l2(std::span<const std::int64_t> x, double c) {
  std::vector<double> real(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) real[j] = static_cast<double>(x[j]);
  return clip_l2(std::span<const double>(real), c);
}

double error_functional(std::span<const double> norms, std::int64_t d, double c,
                        double rho) {
  if (!(c >= 0.0)) throw ConfigError("error_functional requires C >= 0");
  check_positive_rho(rho);
  const double n = static_cast<double>(norms.size());
  double bias = 0.0;
  for (double v : norms) bias += std::max(v - c, 0.0);
  return bias / n + c / n * std::sqrt(2.0 * static_cast<double>(d) / rho);
}

double error_functional(const Dataset& data, double c, double rho) {
  std::vector<double> norms(data.n());
  for (std::int64_t i = 0; i < data.n(); ++i) {
    norms[i] = l2_norm(data.row(static_cast<std::size_t>(i)));
  }
  return error_functional(norms, data.dim(), c, rho);
}

std::int64_t optimal_clip_rank(std::int64_t n, std::int64_t d, double rho,
                               double tau) {
  check_positive_rho(rho);
  if (n < 1 || d < 1) throw ConfigError("optimal_clip_rank requires n, d >= 1");
  if (!(tau >= 0.0)) throw ConfigError("optimal_clip_rank requires tau >= 0");
  const double margin = std::max(std::sqrt(2.0 * static_cast<double>(d) / rho), tau);
  const std::int64_t k = static_cast<std::int64_t>(std::ceil(margin));
  return std::max<std::int64_t>(n - k, 1);
}

namespace internal {

std::vector<double> clipped_mean_value(const IntMatrix& rows, double c,
                                       double rho, Rng& rng) {
  const std::size_t n = rows.rows;
  const std::size_t d = rows.cols;
  std::vector<double> sum(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> clipped = clip_l2(rows.row(i), c);
    for (std::size_t j = 0; j < d; ++j) sum[j] += clipped[j];
  }
  for (double& v : sum) v /= static_cast<double>(n);
  const double gs = 2.0 * c / static_cast<double>(n);
  return gaussian_mechanism(sum, gs, rho, rng);
}

NormDomain norm_quantile_domain(std::int64_t d, std::int64_t coord_bound) {
  if (coord_bound < 1) throw ConfigError("coordinate bound must be >= 1");
  if (d < 1) throw ConfigError("dimension must be >= 1");
  const __int128 full = static_cast<__int128>(d) *
                        static_cast<__int128>(coord_bound) * coord_bound;
  const __int128 limit = static_cast<__int128>(1) << 62;
  NormDomain domain;
  while ((full >> domain.shift) >= limit) ++domain.shift;
  domain.universe = static_cast<std::int64_t>(full >> domain.shift);
  return domain;
}

std::vector<std::int64_t> scaled_squared_norms(const IntMatrix& rows,
                                               const NormDomain& domain) {
  std::vector<std::int64_t> out(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    __int128 s = 0;
    for (std::int64_t v : rows.row(i)) {
      s += static_cast<__int128>(v) * v;
    }
    out[i] = static_cast<std::int64_t>(s >> domain.shift);
  }
  return out;
}

double norm_from_scaled(std::int64_t scaled_value, int shift) {
  const double bucket = std::ldexp(1.0, shift);
  // Top of the coarse bucket; exact for shift = 0.
  return std::sqrt(static_cast<double>(scaled_value) * bucket + (bucket - 1.0));
}

double auto_fallback_threshold(std::int64_t d, double rho,
                               std::int64_t coord_bound, double beta) {
  const NormDomain domain = norm_quantile_domain(d, coord_bound);
  const double tau = rank_error_bound(domain.universe, rho / 4.0, beta);
  return std::max(std::sqrt(2.0 * static_cast<double>(d) / rho), tau);
}

AutoResult clipped_mean_auto_impl(const IntMatrix& rows,
                                  std::int64_t coord_bound, double rho,
                                  double beta, Rng& rng) {
  const std::int64_t n = static_cast<std::int64_t>(rows.rows);
  const std::int64_t d = static_cast<std::int64_t>(rows.cols);
  const NormDomain domain = norm_quantile_domain(d, coord_bound);
  AutoResult result;
  result.tau = rank_error_bound(domain.universe, rho / 4.0, beta);
  if (static_cast<double>(n) <=
      auto_fallback_threshold(d, rho, coord_bound, beta)) {
    result.value.assign(rows.cols, 0.0);
    result.fallback = true;
    return result;
  }

  std::vector<std::int64_t> norms_sq = scaled_squared_norms(rows, domain);
  for (std::int64_t s : norms_sq) {
    if (s > domain.universe) {
      throw DataError("squared norm exceeds the declared universe");
    }
  }
  result.rank = optimal_clip_rank(n, d, rho, result.tau);
  CentralRangeCountOracle oracle(std::move(norms_sq), domain.universe,
                                 rho / 4.0, rng);
  // The search targets x_(m+1); cap at n - 1 so a rank of n still selects
  // the largest norm rather than the universe sentinel.
  const QuantileResult qr =
      priv_quantile(oracle, std::min<std::int64_t>(result.rank, n - 1), beta);
  result.threshold =
      norm_from_scaled(std::max<std::int64_t>(qr.value, 0), domain.shift);
  result.value = clipped_mean_value(rows, result.threshold, 3.0 * rho / 4.0, rng);
  return result;
}

}  // namespace internal

MeanEstimate clipped_mean(const Dataset& data, double c, double rho, Rng& rng) {
  if (!(c > 0.0)) throw ConfigError("clipped_mean requires C > 0");
  check_positive_rho(rho);
  PrivacyLedger ledger(PrivacyBudget::zcdp(rho));
  ledger.charge("clipped-mean", BudgetFraction(1));
  MeanEstimate est(std::move(ledger));
  est.value = internal::clipped_mean_value(data.matrix(), c, rho, rng);
  est.clip_threshold = c;
  return est;
}

ClipThresholdResult private_clip_threshold(const Dataset& data,
                                           double rho_quantile, double rho_full,
                                           double beta, Rng& rng) {
  check_positive_rho(rho_quantile);
  check_positive_rho(rho_full);
  check_beta(beta);
  const internal::NormDomain domain =
      internal::norm_quantile_domain(data.dim(), data.universe());
  ClipThresholdResult result;
  result.tau = rank_error_bound(domain.universe, rho_quantile, beta);
  result.rank = optimal_clip_rank(data.n(), data.dim(), rho_full, result.tau);
  CentralRangeCountOracle oracle(
      internal::scaled_squared_norms(data.matrix(), domain), domain.universe,
      rho_quantile, rng);
  const QuantileResult qr = priv_quantile(
      oracle, std::min<std::int64_t>(result.rank, data.n() - 1), beta);
  result.raw_value = qr.value;
  result.queries_used = qr.queries_used;
  result.threshold = internal::norm_from_scaled(
      std::max<std::int64_t>(qr.value, 0), domain.shift);
  return result;
}

MeanEstimate clipped_mean_auto(const Dataset& data, double rho, double beta,
                               Rng& rng) {
  check_positive_rho(rho);
  check_beta(beta);
  internal::AutoResult inner = internal::clipped_mean_auto_impl(
      data.matrix(), data.universe(), rho, beta, rng);
  PrivacyLedger ledger(PrivacyBudget::zcdp(rho));
  if (inner.fallback) {
    ledger.charge("fallback-zero", BudgetFraction(1));
  } else {
    ledger.charge("clip-threshold", BudgetFraction(1, 4));
    ledger.charge("clipped-mean", BudgetFraction(3, 4));
  }
  MeanEstimate est(std::move(ledger));
  est.value = std::move(inner.value);
  est.clip_threshold = inner.threshold;
  est.clip_rank = inner.rank;
  est.fallback_zero = inner.fallback;
  return est;
}

MeanEstimate clipped_mean_auto_signed(const IntMatrix& rows,
                                      std::int64_t coord_bound, double rho,
                                      double beta, Rng& rng) {
  check_positive_rho(rho);
  check_beta(beta);
  internal::AutoResult inner =
      internal::clipped_mean_auto_impl(rows, coord_bound, rho, beta, rng);
  PrivacyLedger ledger(PrivacyBudget::zcdp(rho));
  if (inner.fallback) {
    ledger.charge("fallback-zero", BudgetFraction(1));
  } else {
    ledger.charge("clip-threshold", BudgetFraction(1, 4));
    ledger.charge("clipped-mean", BudgetFraction(3, 4));
  }
  MeanEstimate est(std::move(ledger));
  est.value = std::move(inner.value);
  est.clip_threshold = inner.threshold;
  est.clip_rank = inner.rank;
  est.fallback_zero = inner.fallback;
  return est;
}

MeanEstimate shifted_clipped_mean(const Dataset& data, double rho, double beta,
                                  const RandomSource& source) {
  check_positive_rho(rho);
  check_beta(beta);
  const std::int64_t n = data.n();
  const std::int64_t d_orig = data.dim();
  const std::int64_t d_pad = next_pow2(d_orig);
  const std::int64_t offset = d_pad * data.universe();
  const double rho_clip = 3.0 * rho / 4.0;
  const double rho_med = rho / (4.0 * static_cast<double>(d_pad));

  // Small-n guard before any budget is spent; uses public quantities only.
  // Beyond the clip-stage margin, the per-dimension medians must resolve:
  // a rank-error bound at the median budget that exceeds n would leave the
  // shift unconstrained and the noise scaled to the full range.
  const double guard =
      std::max(internal::auto_fallback_threshold(d_pad, rho_clip, 2 * offset, beta),
               rank_error_bound(2 * offset, rho_med, beta));
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

  // Per-dimension approximate medians over the offset-mapped coordinates.
  const std::int64_t m_med = (n + 1) / 2;
  std::vector<std::int64_t> shift(d_pad);
  for (std::int64_t j = 0; j < d_pad; ++j) {
    std::vector<std::int64_t> column(n);
    for (std::int64_t i = 0; i < n; ++i) column[i] = rotated.at(i, j) + offset;
    CentralRangeCountOracle oracle(std::move(column), 2 * offset, rho_med,
                                   source.stream("median-noise", j));
    shift[j] = priv_quantile(oracle, m_med, beta).value - offset;
  }

  IntMatrix shifted(n, d_pad);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < d_pad; ++j) {
      shifted.at(i, j) = rotated.at(i, j) - shift[j];
    }
  }

  Rng clip_rng = source.stream("clip-noise");
  internal::AutoResult inner = internal::clipped_mean_auto_impl(
      shifted, 2 * offset, rho_clip, beta, clip_rng);

  PrivacyLedger ledger(PrivacyBudget::zcdp(rho));
  for (std::int64_t j = 0; j < d_pad; ++j) {
    ledger.charge("median[" + std::to_string(j) + "]",
                  BudgetFraction(1, 4 * d_pad));
  }
  ledger.charge("clip-threshold", BudgetFraction(3, 16));
  ledger.charge("clipped-mean", BudgetFraction(9, 16));

  MeanEstimate est(std::move(ledger));
  std::vector<double> combined(d_pad);
  for (std::int64_t j = 0; j < d_pad; ++j) {
    combined[j] = inner.value[j] + static_cast<double>(shift[j]);
  }
  est.value = inverse_rotate(ctx, combined);
  est.clip_threshold = inner.threshold;
  est.clip_rank = inner.rank;
  est.shift.emplace(shift.begin(), shift.end());
  return est;
}

double gaussian_mean_clip_radius(double range_bound, double sigma_max,
                                 std::int64_t d, std::int64_t n, double beta) {
  return range_bound +
         2.0 * sigma_max *
             std::sqrt(static_cast<double>(d) +
                       std::log(4.0 * static_cast<double>(n) / beta));
}

MeanEstimate gaussian_mean(const RealMatrix& samples,
                           const GaussianMeanParams& params,
                           const RandomSource& source) {
  if (samples.rows == 0 || samples.cols == 0) {
    throw DataError("gaussian_mean requires nonempty samples");
  }
  if (!(params.sigma_min > 0.0) || !(params.sigma_max > 0.0) ||
      !(params.range_bound > 0.0)) {
    throw ConfigError("gaussian_mean requires positive R and sigma bounds");
  }
  check_positive_rho(params.rho);
  check_beta(params.beta);
  const std::int64_t n = static_cast<std::int64_t>(samples.rows);
  const std::int64_t d = static_cast<std::int64_t>(samples.cols);

  const double r_prime = gaussian_mean_clip_radius(
      params.range_bound, params.sigma_max, d, n, params.beta);
  RealMatrix clipped(samples.rows, samples.cols);
  for (std::size_t i = 0; i < samples.rows; ++i) {
    const std::vector<double> row = clip_l2(samples.row(i), r_prime);
    std::copy(row.begin(), row.end(), clipped.row(i).begin());
  }

  const double alpha =
      params.sigma_min * std::sqrt(static_cast<double>(d) / static_cast<double>(n));
  const QuantizationGrid grid = QuantizationGrid::make(r_prime, alpha, static_cast<int>(d));
  const Dataset ds(quantize(clipped, grid), grid.u);

  MeanEstimate inner = shifted_clipped_mean(ds, params.rho, params.beta, source);
  if (inner.fallback_zero) {
    inner.value.assign(samples.cols, 0.0);
    return inner;
  }
  for (double& v : inner.value) v = grid.dequantize_value(v);
  return inner;
}

}  // namespace dpmean
