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

#include "dpmean/random.hpp"

namespace dpmean {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t derive(std::uint64_t seed, std::string_view name,
                     std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a64(name)) + index * kGolden);
}

}  // namespace

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal_(engine_);
}

double Rng::noise(double stddev) {
  if (!noise_enabled_ || stddev == 0.0) return 0.0;
  return stddev * normal_(engine_);
}

double Rng::uniform() { return unit_(engine_); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
}

std::uint64_t Rng::next_u64() { return engine_(); }

Rng RandomSource::stream(std::string_view name, std::uint64_t index) const {
  return Rng(derive(seed_, name, index), noise_enabled_);
}

RandomSource RandomSource::subsource(std::string_view name,
                                     std::uint64_t index) const {
  return RandomSource(derive(seed_, name, index), noise_enabled_);
}

}  // namespace dpmean
