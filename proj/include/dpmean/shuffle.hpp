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
#include <span>
#include <vector>

#include "dpmean/central.hpp"
#include "dpmean/dataset.hpp"
#include "dpmean/matrix.hpp"
#include "dpmean/random.hpp"

namespace dpmean {

// Fixed-point split-and-mix summation over Z_q. Each user encodes
// round(s (x + C)) plus a Polya noise share and splits the result into m
// additive shares, so any strict subset of messages is uniform and the
// n-user noise total is a discrete Laplace with parameter p.
struct ShuffleParams {
  std::int64_t modulus = 0;    // q, a power of two
  double scale = 0.0;          // s = n / C (fixed-point resolution C/n)
  int shares_per_user = 2;     // m
  double polya_p = 0.0;        // p = exp(-epsilon / ceil(2 s C))
  double epsilon = 0.0;
  double delta = 0.0;
  double clip_bound = 0.0;     // C
  std::int64_t n = 0;

  static ShuffleParams make(std::int64_t n, double clip_bound, double epsilon,
                            double delta);

  // Variance of the summed noise: 2p / (1-p)^2.
  double noise_sum_variance() const;
  // Closed-form bound on the decoded mean's MSE: noise variance plus
  // worst-case rounding, both scaled to value units.
  double mse_bound() const;
};

// Number of failures of a negative binomial NB(r, p) (Polya) draw.
std::int64_t polya_draw(double r, double p, Rng& rng);

std::vector<std::uint64_t> shuffle_encode_1d(double x, const ShuffleParams& params,
                                             Rng& rng);

// Sums the full transcript mod q, recenters, and rescales to a mean.
// A decoded aggregate outside the valid window is a wraparound failure.
double shuffle_decode_1d(std::span<const std::uint64_t> transcript,
                         const ShuffleParams& params);

struct ShuffleMeanDiag {
  std::int64_t coordinate_clips = 0;
  double coordinate_bound = 0.0;
};

// High-dimensional one-round protocol: rotate, clip each coordinate at
// C' = C sqrt(2 ln(4 n d / beta')), run the 1-D protocol per dimension at
// epsilon' = epsilon / (2 sqrt(d ln(d/delta))), delta' = delta / d, then
// rotate back.
MeanEstimate shuffle_mean_d(const RealMatrix& rows, double clip_bound,
                            double epsilon, double delta, double beta,
                            const RandomSource& source,
                            ShuffleMeanDiag* diag = nullptr);

struct ShuffleOptions {
  bool faithful_users = false;
  // Practical guard on the clip rank, in units of the round-2 range-count
  // noise scale (same role as in the local pipeline).
  double kappa_rank = 1.0;
  // Constant of the theoretical rank margin
  // (1/eps) sqrt(d ln(nd) ln(d/delta)).
  double theta_rank = 1.0;
};

// 3-round shuffle-model pipeline. Medians and the clip threshold reuse the
// local-model range structure at locally converted zCDP budgets; the final
// summation uses the split-and-mix protocol. Budget split: eps/4 medians,
// 3 eps/16 threshold, 9 eps/16 summation, delta split equally.
MeanEstimate shuffle_pipeline(const Dataset& data, double epsilon, double delta,
                              double beta, const RandomSource& source,
                              const ShuffleOptions& options = {});

}  // namespace dpmean
