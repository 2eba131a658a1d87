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
#include <vector>

#include "dpmean/matrix.hpp"

namespace dpmean {

// An n x d matrix of integers in [0, u] with a declared universe bound u.
class Dataset {
 public:
  Dataset(IntMatrix rows, std::int64_t universe);

  std::int64_t n() const { return static_cast<std::int64_t>(rows_.rows); }
  std::int64_t dim() const { return static_cast<std::int64_t>(rows_.cols); }
  std::int64_t universe() const { return universe_; }
  const IntMatrix& matrix() const { return rows_; }
  std::span<const std::int64_t> row(std::size_t i) const { return rows_.row(i); }

  std::vector<std::int64_t> squared_norms() const;
  std::vector<double> exact_mean() const;

  // max_i ||x_i||_2
  double radius() const;
  // max_{i,j} ||x_i - x_j||_2, by brute force (desk scale).
  double diameter() const;

 private:
  IntMatrix rows_;
  std::int64_t universe_;
};

}  // namespace dpmean
