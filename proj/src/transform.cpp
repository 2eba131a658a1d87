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

#include "dpmean/transform.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "dpmean/errors.hpp"

namespace dpmean {
namespace {

bool is_pow2(std::int64_t x) { return x > 0 && (x & (x - 1)) == 0; }

// Entries of H v are +-1 sums of the inputs, so they are bounded by
// d * max|v|; demand headroom below 2^62 before transforming.
void check_fwht_headroom(std::span<const std::int64_t> v) {
  std::int64_t max_abs = 0;
  for (std::int64_t x : v) {
    const std::int64_t a = std::abs(x);
    if (a > max_abs) max_abs = a;
  }
  const std::int64_t limit = std::int64_t{1} << 62;
  if (max_abs != 0 &&
      static_cast<std::int64_t>(v.size()) > limit / max_abs) {
    throw std::overflow_error("fwht accumulator would overflow: d * max|v| too large");
  }
}

template <typename T>
void fwht_impl(std::span<T> v) {
  const std::size_t n = v.size();
  if (!is_pow2(static_cast<std::int64_t>(n))) {
    throw ConfigError("fwht length must be a power of two");
  }
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const T a = v[j];
        const T b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

}  // namespace

std::int64_t next_pow2(std::int64_t x) {
  if (x <= 1) return 1;
  std::int64_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

void fwht_inplace(std::span<std::int64_t> v) {
  check_fwht_headroom(v);
  fwht_impl(v);
}

void fwht_inplace(std::span<double> v) { fwht_impl(v); }

RotationContext RotationContext::make(int d_orig, Rng& rng) {
  if (d_orig < 1) throw ConfigError("rotation requires d >= 1");
  RotationContext ctx;
  ctx.d_orig = d_orig;
  ctx.d_pad = static_cast<int>(next_pow2(d_orig));
  ctx.signs.resize(ctx.d_pad);
  for (auto& s : ctx.signs) s = (rng.next_u64() & 1) ? 1 : -1;
  return ctx;
}

template <typename T>
static std::vector<T> rotate_impl(const RotationContext& ctx, std::span<const T> x) {
  if (static_cast<int>(x.size()) != ctx.d_orig) {
    throw ConfigError("rotate: dimension mismatch");
  }
  std::vector<T> padded(ctx.d_pad, T{});
  for (int j = 0; j < ctx.d_orig; ++j) {
    padded[j] = x[j] * static_cast<T>(ctx.signs[j]);
  }
  if constexpr (std::is_same_v<T, std::int64_t>) {
    fwht_inplace(std::span<std::int64_t>(padded));
  } else {
    fwht_inplace(std::span<double>(padded));
  }
  return padded;
}

std::vector<std::int64_t> rotate(const RotationContext& ctx,
                                 std::span<const std::int64_t> x) {
  return rotate_impl<std::int64_t>(ctx, x);
}

std::vector<double> rotate(const RotationContext& ctx, std::span<const double> x) {
  return rotate_impl<double>(ctx, x);
}

std::vector<double> inverse_rotate(const RotationContext& ctx,
                                   std::span<const double> y) {
  if (static_cast<int>(y.size()) != ctx.d_pad) {
    throw ConfigError("inverse_rotate: dimension mismatch");
  }
  std::vector<double> work(y.begin(), y.end());
  fwht_inplace(std::span<double>(work));
  std::vector<double> out(ctx.d_orig);
  const double inv = 1.0 / static_cast<double>(ctx.d_pad);
  for (int j = 0; j < ctx.d_orig; ++j) {
    out[j] = work[j] * static_cast<double>(ctx.signs[j]) * inv;
  }
  return out;
}

QuantizationGrid QuantizationGrid::make(double range_bound, double alpha, int d) {
  if (!(range_bound > 0.0)) throw ConfigError("quantization requires R > 0");
  if (!(alpha > 0.0) || !(alpha < 2.0 * range_bound * std::sqrt(double(d)))) {
    throw ConfigError("quantization requires 0 < alpha < 2R*sqrt(d)");
  }
  if (d < 1) throw ConfigError("quantization requires d >= 1");
  QuantizationGrid grid;
  grid.range_bound = range_bound;
  grid.bucket = alpha / std::sqrt(static_cast<double>(d));
  grid.u = static_cast<std::int64_t>(
      std::ceil(2.0 * range_bound * std::sqrt(static_cast<double>(d)) / alpha));
  return grid;
}

std::int64_t QuantizationGrid::quantize_value(double x) const {
  if (!(std::abs(x) <= range_bound * (1.0 + 1e-12))) {
    throw DataError("quantize: value outside the declared range");
  }
  std::int64_t idx = std::llround((x + range_bound) / bucket);
  if (idx < 0) idx = 0;
  if (idx > u) idx = u;
  return idx;
}

IntMatrix quantize(const RealMatrix& xs, const QuantizationGrid& grid) {
  IntMatrix out(xs.rows, xs.cols);
  for (std::size_t i = 0; i < xs.values.size(); ++i) {
    out.values[i] = grid.quantize_value(xs.values[i]);
  }
  return out;
}

RealMatrix dequantize(const IntMatrix& xs, const QuantizationGrid& grid) {
  RealMatrix out(xs.rows, xs.cols);
  for (std::size_t i = 0; i < xs.values.size(); ++i) {
    out.values[i] = grid.dequantize_value(static_cast<double>(xs.values[i]));
  }
  return out;
}

}  // namespace dpmean
