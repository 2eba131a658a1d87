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
#include <random>
#include <string_view>

namespace dpmean {

// One derived random substream. normal()/uniform() are for data
// generation and protocol randomness; noise() is the injection point for
// privacy noise and returns 0 without consuming state when the owning
// source has noise disabled (test hook).
class Rng {
 public:
  double normal(double mean = 0.0, double stddev = 1.0);
  double noise(double stddev);
  double uniform();  // [0, 1)
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
  std::uint64_t next_u64();

  bool noise_enabled() const { return noise_enabled_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  friend class RandomSource;
  Rng(std::uint64_t seed, bool noise_enabled)
      : engine_(seed), noise_enabled_(noise_enabled) {}

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  bool noise_enabled_;
};

// Master seed plus named substream derivation. Identical
// (seed, name, index) always yields the identical stream, so trials and
// per-user randomizers can be handed to parallel workers and still
// reproduce bit-for-bit.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, bool noise_enabled = true)
      : seed_(seed), noise_enabled_(noise_enabled) {}

  Rng stream(std::string_view name) const { return stream(name, 0); }
  Rng stream(std::string_view name, std::uint64_t index) const;

  // A child source, e.g. one per benchmark trial.
  RandomSource subsource(std::string_view name, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  bool noise_enabled() const { return noise_enabled_; }

 private:
  std::uint64_t seed_;
  bool noise_enabled_;
};

}  // namespace dpmean
