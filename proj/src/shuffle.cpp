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

#include "dpmean/shuffle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dpmean/errors.hpp"
#include "dpmean/local.hpp"
#include "dpmean/transform.hpp"

namespace dpmean {
namespace {

double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::int64_t mod_q(std::int64_t v, std::int64_t q) {
  const std::int64_t r = v % q;
  return r < 0 ? r + q : r;
}

}  // namespace

ShuffleParams ShuffleParams::make(std::int64_t n, double clip_bound,
                                  double epsilon, double delta) {
  if (n < 1) throw ConfigError("shuffle protocol requires n >= 1");
  if (!(clip_bound > 0.0)) throw ConfigError("shuffle protocol requires C > 0");
  if (!(epsilon > 0.0)) throw ConfigError("shuffle protocol requires epsilon > 0");
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    throw ConfigError("shuffle protocol requires delta in [0,1)");
  }
  ShuffleParams p;
  p.n = n;
  p.clip_bound = clip_bound;
  p.epsilon = epsilon;
  p.delta = delta;
  p.scale = static_cast<double>(n) / clip_bound;
  const double sensitivity = std::ceil(2.0 * p.scale * clip_bound - 1e-9);
  p.polya_p = std::exp(-epsilon / sensitivity);
  int shares = 2;
  while ((std::int64_t{1} << (shares - 1)) < n) ++shares;
  p.shares_per_user = shares;

  const std::int64_t max_aggregate =
      n * static_cast<std::int64_t>(std::llround(p.scale * 2.0 * clip_bound));
  std::int64_t q = next_pow2(4 * max_aggregate);
  // No wraparound of the true aggregate plus a 10-sigma noise excursion.
  const double slack = 10.0 * std::sqrt(p.noise_sum_variance()) + 1.0;
  while (static_cast<double>(q) <= static_cast<double>(max_aggregate) + 2.0 * slack) {
    q <<= 1;
  }
  p.modulus = q;
  return p;
}

double ShuffleParams::noise_sum_variance() const {
  return 2.0 * polya_p / ((1.0 - polya_p) * (1.0 - polya_p));
}

double ShuffleParams::mse_bound() const {
  const double sn = scale * static_cast<double>(n);
  const double noise_mse = noise_sum_variance() / (sn * sn);
  const double rounding = 1.0 / (2.0 * scale);  // worst-case mean offset
  return noise_mse + rounding * rounding;
}

std::int64_t polya_draw(double r, double p, Rng& rng) {
  if (!rng.noise_enabled()) return 0;
  std::gamma_distribution<double> gamma(r, p / (1.0 - p));
  const double lambda = gamma(rng.engine());
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> poisson(lambda);
  return poisson(rng.engine());
}

std::vector<std::uint64_t> shuffle_encode_1d(double x, const ShuffleParams& params,
                                             Rng& rng) {
  if (!(std::abs(x) <= params.clip_bound + 1e-9)) {
    throw DataError("shuffle_encode_1d: value outside [-C, C]");
  }
  const double r = 1.0 / static_cast<double>(params.n);
  const std::int64_t noise =
      polya_draw(r, params.polya_p, rng) - polya_draw(r, params.polya_p, rng);
  const std::int64_t z =
      std::llround(params.scale * (x + params.clip_bound)) + noise;
  const std::int64_t q = params.modulus;

  std::vector<std::uint64_t> shares(params.shares_per_user);
  std::int64_t acc = 0;
  for (int k = 0; k + 1 < params.shares_per_user; ++k) {
    const std::int64_t share = rng.uniform_int(0, q - 1);
    shares[k] = static_cast<std::uint64_t>(share);
    acc = mod_q(acc + share, q);
  }
  shares.back() = static_cast<std::uint64_t>(mod_q(z - acc, q));
  return shares;
}

double shuffle_decode_1d(std::span<const std::uint64_t> transcript,
                         const ShuffleParams& params) {
  const std::int64_t expected =
      params.n * static_cast<std::int64_t>(params.shares_per_user);
  if (static_cast<std::int64_t>(transcript.size()) != expected) {
    throw DataError("shuffle_decode_1d: transcript size mismatch");
  }
  const std::int64_t q = params.modulus;
  std::int64_t sum = 0;
  for (std::uint64_t msg : transcript) {
    if (static_cast<std::int64_t>(msg) >= q) {
      throw DataError("shuffle_decode_1d: message outside Z_q");
    }
    sum = mod_q(sum + static_cast<std::int64_t>(msg), q);
  }
  const std::int64_t max_aggregate =
      params.n *
      static_cast<std::int64_t>(std::llround(params.scale * 2.0 * params.clip_bound));
  // Values beyond the midpoint of the spare range decode as negatives.
  if (sum > max_aggregate + (q - max_aggregate) / 2) sum -= q;
  const double slack = 10.0 * std::sqrt(params.noise_sum_variance()) + 1.0;
  if (static_cast<double>(sum) < -slack ||
      static_cast<double>(sum) > static_cast<double>(max_aggregate) + slack) {
    throw DataError("shuffle_decode_1d: aggregate outside the valid range");
  }
  return static_cast<double>(sum) /
             (params.scale * static_cast<double>(params.n)) -
         params.clip_bound;
}

MeanEstimate shuffle_mean_d(const RealMatrix& rows, double clip_bound,
                            double epsilon, double delta, double beta,
                            const RandomSource& source, ShuffleMeanDiag* diag) {
  if (rows.rows == 0 || rows.cols == 0) {
    throw DataError("shuffle_mean_d requires nonempty input");
  }
  if (!(clip_bound > 0.0)) throw ConfigError("shuffle_mean_d requires C > 0");
  if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("beta must be in (0,1)");
  const std::int64_t n = static_cast<std::int64_t>(rows.rows);
  const int d_orig = static_cast<int>(rows.cols);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    if (l2_norm(rows.row(i)) > clip_bound + 1e-9) {
      throw DataError("shuffle_mean_d: row norm exceeds the clip bound");
    }
  }

  Rng sign_rng = source.stream("shuffle-rotation-signs");
  const RotationContext ctx = RotationContext::make(d_orig, sign_rng);
  const std::int64_t d_pad = ctx.d_pad;

  const double beta_rot = beta / 3.0;
  const double coord_bound =
      clip_bound * std::sqrt(2.0 * std::log(4.0 * static_cast<double>(n) *
                                            static_cast<double>(d_pad) / beta_rot));
  const double eps_dim =
      epsilon / (2.0 * std::sqrt(static_cast<double>(d_pad) *
                                 std::log(static_cast<double>(d_pad) / delta)));
  const double delta_dim = delta / static_cast<double>(d_pad);
  const ShuffleParams params =
      ShuffleParams::make(n, coord_bound, eps_dim, delta_dim);

  if (diag != nullptr) {
    diag->coordinate_clips = 0;
    diag->coordinate_bound = coord_bound;
  }

  RealMatrix rotated(rows.rows, static_cast<std::size_t>(d_pad));
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const std::vector<double> r = rotate(ctx, rows.row(i));
    std::copy(r.begin(), r.end(), rotated.row(i).begin());
  }

  std::vector<double> decoded(d_pad);
  std::vector<std::uint64_t> transcript;
  for (std::int64_t j = 0; j < d_pad; ++j) {
    transcript.clear();
    transcript.reserve(static_cast<std::size_t>(n) * params.shares_per_user);
    for (std::int64_t i = 0; i < n; ++i) {
      double v = rotated.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (std::abs(v) > coord_bound) {
        v = std::clamp(v, -coord_bound, coord_bound);
        if (diag != nullptr) ++diag->coordinate_clips;
      }
      Rng user_rng = source.stream("shuffle-encode",
                                   static_cast<std::uint64_t>(j * n + i));
      const std::vector<std::uint64_t> shares =
          shuffle_encode_1d(v, params, user_rng);
      transcript.insert(transcript.end(), shares.begin(), shares.end());
    }
    Rng shuffler = source.stream("shuffler", static_cast<std::uint64_t>(j));
    std::shuffle(transcript.begin(), transcript.end(), shuffler.engine());
    decoded[j] = shuffle_decode_1d(transcript, params);
  }

  PrivacyLedger ledger(PrivacyBudget::approx_dp(epsilon, delta));
  ledger.charge("rotated-per-dimension-sum", BudgetFraction(1), BudgetFraction(1));
  MeanEstimate est(std::move(ledger));
  est.value = inverse_rotate(ctx, decoded);
  est.clip_threshold = clip_bound;
  return est;
}

MeanEstimate shuffle_pipeline(const Dataset& data, double epsilon, double delta,
                              double beta, const RandomSource& source,
                              const ShuffleOptions& options) {
  if (!(epsilon > 0.0)) throw ConfigError("shuffle_pipeline requires epsilon > 0");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("shuffle_pipeline requires delta in (0,1)");
  }
  if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("beta must be in (0,1)");
  const std::int64_t n = data.n();
  const std::int64_t d_orig = data.dim();
  const std::int64_t d_pad = next_pow2(d_orig);
  const std::int64_t offset = d_pad * data.universe();
  const std::int64_t med_universe = 2 * offset;
  const internal::NormDomain norm_domain =
      internal::norm_quantile_domain(d_pad, 2 * offset);

  const double eps_sum = 9.0 * epsilon / 16.0;
  const double delta_round = delta / 3.0;
  const double rho_med_total = approx_dp_to_zcdp(epsilon / 4.0, delta_round);
  const double rho_med = rho_med_total / static_cast<double>(d_pad);
  const double rho_thresh = approx_dp_to_zcdp(3.0 * epsilon / 16.0, delta_round);

  const double rank_margin_theory =
      options.theta_rank / eps_sum *
      std::sqrt(static_cast<double>(d_pad) *
                std::log(static_cast<double>(n) * static_cast<double>(d_pad)) *
                std::log(static_cast<double>(d_pad) / delta_round));

  const double guard = std::max(
      rank_margin_theory, ldp_range_noise_scale(med_universe, n, rho_med));
  if (static_cast<double>(n) <= guard) {
    PrivacyLedger ledger(PrivacyBudget::approx_dp(epsilon, delta));
    ledger.charge("fallback-zero", BudgetFraction(1), BudgetFraction(1));
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

  const std::int64_t m_med = (n + 1) / 2;
  std::vector<std::int64_t> shift(d_pad);
  for (std::int64_t j = 0; j < d_pad; ++j) {
    std::vector<std::int64_t> column(n);
    for (std::int64_t i = 0; i < n; ++i) column[i] = rotated.at(i, j) + offset;
    LdpRangeStructure structure =
        build_ldp_structure(std::move(column), med_universe, rho_med, source,
                            "shuffle-median", j, options.faithful_users);
    LdpRangeCountOracle oracle(structure);
    shift[j] = priv_quantile(oracle, m_med, beta).value - offset;
  }

  IntMatrix shifted(n, d_pad);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < d_pad; ++j) {
      shifted.at(i, j) = rotated.at(i, j) - shift[j];
    }
  }

  LdpRangeStructure norm_structure = build_ldp_structure(
      internal::scaled_squared_norms(shifted, norm_domain),
      norm_domain.universe, rho_thresh, source, "shuffle-threshold", 0,
      options.faithful_users);
  const double sigma_rc =
      ldp_range_noise_scale(norm_domain.universe, n, rho_thresh);
  const double margin =
      std::max(rank_margin_theory, options.kappa_rank * sigma_rc);
  const std::int64_t m = std::max<std::int64_t>(
      n - static_cast<std::int64_t>(std::ceil(margin)), 1);
  const std::int64_t raw = ldp_quantile_value(
      norm_structure, std::min<std::int64_t>(m, n - 1));
  // A degenerate threshold of zero would break the fixed-point scale; one
  // grid unit clips everything nonzero to the unit sphere instead.
  const double threshold = std::max(
      internal::norm_from_scaled(std::max<std::int64_t>(raw, 0),
                                 norm_domain.shift),
      1.0);

  RealMatrix clipped(n, d_pad);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::vector<double> row = clip_l2(shifted.row(i), threshold);
    std::copy(row.begin(), row.end(), clipped.row(i).begin());
  }

  MeanEstimate inner = shuffle_mean_d(clipped, threshold, eps_sum, delta_round,
                                      beta, source.subsource("shuffle-sum", 0));

  PrivacyLedger ledger(PrivacyBudget::approx_dp(epsilon, delta));
  for (std::int64_t j = 0; j < d_pad; ++j) {
    ledger.charge("median[" + std::to_string(j) + "]",
                  BudgetFraction(1, 4 * d_pad), BudgetFraction(1, 3 * d_pad));
  }
  ledger.charge("clip-threshold", BudgetFraction(3, 16), BudgetFraction(1, 3));
  ledger.charge("summation", BudgetFraction(9, 16), BudgetFraction(1, 3));

  MeanEstimate est(std::move(ledger));
  std::vector<double> combined(d_pad);
  for (std::int64_t j = 0; j < d_pad; ++j) {
    combined[j] = inner.value[j] + static_cast<double>(shift[j]);
  }
  est.value = inverse_rotate(ctx, combined);
  est.clip_threshold = threshold;
  est.clip_rank = m;
  est.shift.emplace(shift.begin(), shift.end());
  return est;
}

}  // namespace dpmean
