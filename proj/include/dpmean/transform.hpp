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

#include "dpmean/matrix.hpp"
#include "dpmean/random.hpp"

namespace dpmean {

std::int64_t next_pow2(std::int64_t x);

// Unnormalized Walsh-Hadamard transform in place: v <- H v with H the
// +-1 Hadamard matrix of order v.size() (a power of two). Exact integer
// arithmetic; throws std::overflow_error if d * max|v| could exceed the
// 64-bit accumulator headroom.
void fwht_inplace(std::span<std::int64_t> v);
void fwht_inplace(std::span<double> v);

// Random +-1 diagonal followed by the Hadamard matrix, with zero padding
// to the next power of two. The normalization 1/sqrt(d) is deliberately
// omitted so that integer inputs stay integer; inverse_rotate undoes the
// full unnormalized map.
struct RotationContext {
  int d_orig = 0;
  int d_pad = 0;
  std::vector<std::int8_t> signs;  // length d_pad, entries in {-1, +1}
  std::uint64_t seed = 0;

  static RotationContext make(int d_orig, Rng& rng);
};

// H * diag(signs) * pad(x). Preserves squared l2 norm up to the exact
// factor d_pad.
std::vector<std::int64_t> rotate(const RotationContext& ctx,
                                 std::span<const std::int64_t> x);
std::vector<double> rotate(const RotationContext& ctx, std::span<const double> x);

// (H D)^{-1} y = D H y / d_pad, truncated back to the original dimension.
std::vector<double> inverse_rotate(const RotationContext& ctx,
                                   std::span<const double> y);

// Uniform grid reducing real coordinates in [-R, R] to integers [0, u]
// with per-coordinate bucket alpha/sqrt(d), so a whole vector moves by at
// most alpha/2 in l2.
struct QuantizationGrid {
  double range_bound = 0.0;  // R
  double bucket = 0.0;
  std::int64_t u = 0;

  static QuantizationGrid make(double range_bound, double alpha, int d);

  std::int64_t quantize_value(double x) const;  // throws DataError outside +-R
  double dequantize_value(double index) const { return index * bucket - range_bound; }
};

// Quantizes a full matrix; every entry must lie in [-R, R].
IntMatrix quantize(const RealMatrix& xs, const QuantizationGrid& grid);
RealMatrix dequantize(const IntMatrix& xs, const QuantizationGrid& grid);

}  // namespace dpmean
