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
#include <optional>
#include <span>
#include <vector>

#include "dpmean/budget.hpp"
#include "dpmean/dataset.hpp"
#include "dpmean/matrix.hpp"
#include "dpmean/quantile.hpp"
#include "dpmean/random.hpp"
#include "dpmean/transform.hpp"

namespace dpmean {

struct MeanEstimate {
  std::vector<double> value;
  double clip_threshold = 0.0;
  std::int64_t clip_rank = 0;
  PrivacyLedger ledger;
  bool fallback_zero = false;
  std::optional<std::vector<double>> shift;

  explicit MeanEstimate(PrivacyLedger l) : ledger(std::move(l)) {}
};

// x scaled by min{c / ||x||_2, 1}; direction preserved, zero vector fixed.
std::vector<double> clip_l2(std::span<const double> x, double c);
std::vector<double> clip_l2(std::span<const std::int64_t> x, double c);

// E(C; D) = (1/n) sum_i max{||x_i|| - C, 0} + (C/n) sqrt(2d / rho).
// Convex in C; its minimizer sits at the (n - sqrt(2d/rho))-th norm
// order statistic.
double error_functional(std::span<const double> norms, std::int64_t d, double c,
                        double rho);
double error_functional(const Dataset& data, double c, double rho);

// max{n - ceil(max{sqrt(2d/rho), tau}), 1}.
std::int64_t optimal_clip_rank(std::int64_t n, std::int64_t d, double rho,
                               double tau);

// Clipped-mean estimator at a fixed threshold: mean of clipped rows plus
// per-coordinate Gaussian noise of variance 2 C^2 / (rho n^2).
MeanEstimate clipped_mean(const Dataset& data, double c, double rho, Rng& rng);

struct ClipThresholdResult {
  double threshold = 0.0;   // sqrt of the selected squared-norm quantile
  std::int64_t rank = 0;    // rank fed to the quantile search
  double tau = 0.0;         // rank-error bound at the selection budget
  std::int64_t raw_value = 0;
  int queries_used = 0;
};

// Quantile of the squared norms (integers in [0, d*u^2]) at the optimal
// clipping rank. rho_quantile is the selection budget; rho_full the budget
// of the mechanism the threshold serves (its noise level sets the rank).
ClipThresholdResult private_clip_threshold(const Dataset& data,
                                           double rho_quantile, double rho_full,
                                           double beta, Rng& rng);

// Threshold selection with rho/4 followed by the clipped mean with 3rho/4;
// returns the zero vector without touching the data when n is too small
// for the rank arithmetic to be meaningful.
MeanEstimate clipped_mean_auto(const Dataset& data, double rho, double beta,
                               Rng& rng);

// Same estimator over integer rows that may be signed (for example after a
// public re-centering); coord_bound is a public bound on |row[j]|.
MeanEstimate clipped_mean_auto_signed(const IntMatrix& rows,
                                      std::int64_t coord_bound, double rho,
                                      double beta, Rng& rng);

// Rotate, shift to per-dimension private medians, run the automatic
// clipped mean on the shifted data, then undo shift and rotation.
// Budget split: d_pad medians at rho/(4 d_pad) each, threshold at 3rho/16,
// mean release at 9rho/16.
MeanEstimate shifted_clipped_mean(const Dataset& data, double rho, double beta,
                                  const RandomSource& source);

struct GaussianMeanParams {
  double range_bound = 0.0;  // a-priori bound on ||mu||_2
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double rho = 0.0;
  double beta = 0.1;
};

// R' = R + 2 sigma_max sqrt(d + ln(4n/beta)).
double gaussian_mean_clip_radius(double range_bound, double sigma_max,
                                 std::int64_t d, std::int64_t n, double beta);

// Statistical wrapper: clip samples to the R' ball, quantize with bucket
// alpha/sqrt(d) for alpha = sigma_min sqrt(d/n), run the shifted clipped
// mean, dequantize.
MeanEstimate gaussian_mean(const RealMatrix& samples,
                           const GaussianMeanParams& params,
                           const RandomSource& source);

namespace internal {

// Mean of clipped rows plus mechanism noise; c >= 0 (c = 0 releases the
// zero vector exactly).
std::vector<double> clipped_mean_value(const IntMatrix& rows, double c,
                                       double rho, Rng& rng);

// Quantile-search domain for squared norms bounded by d * coord_bound^2.
// When that bound exceeds the 64-bit headroom the norms are right-shifted;
// the search then runs over coarse buckets of width 2^shift (shift = 0 is
// the exact domain).
struct NormDomain {
  int shift = 0;
  std::int64_t universe = 0;
};
NormDomain norm_quantile_domain(std::int64_t d, std::int64_t coord_bound);

// Squared norms under the domain's scaling.
std::vector<std::int64_t> scaled_squared_norms(const IntMatrix& rows,
                                               const NormDomain& domain);

// Clip threshold from a scaled quantile value: the top of its bucket.
double norm_from_scaled(std::int64_t scaled_value, int shift);

// The small-n guard of the automatic estimator: n <= max{sqrt(2d/rho), tau}
// with tau evaluated at this mechanism's selection budget rho/4. Uses only
// public quantities.
double auto_fallback_threshold(std::int64_t d, double rho,
                               std::int64_t coord_bound, double beta);

struct AutoResult {
  std::vector<double> value;
  double threshold = 0.0;
  std::int64_t rank = 0;
  double tau = 0.0;
  bool fallback = false;
};

AutoResult clipped_mean_auto_impl(const IntMatrix& rows,
                                  std::int64_t coord_bound, double rho,
                                  double beta, Rng& rng);

}  // namespace internal

}  // namespace dpmean
