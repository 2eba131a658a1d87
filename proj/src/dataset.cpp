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

#include "dpmean/dataset.hpp"

#include <cmath>
#include <utility>

#include "dpmean/errors.hpp"

namespace dpmean {

Dataset::Dataset(IntMatrix rows, std::int64_t universe)
    : rows_(std::move(rows)), universe_(universe) {
  if (rows_.rows == 0 || rows_.cols == 0) {
    throw DataError("dataset must be nonempty");
  }
  if (universe_ < 1) throw DataError("dataset universe must be >= 1");
  for (std::int64_t v : rows_.values) {
    if (v < 0 || v > universe_) {
      throw DataError("dataset entry outside [0, u]");
    }
  }
}

std::vector<std::int64_t> Dataset::squared_norms() const {
  std::vector<std::int64_t> out(rows_.rows);
  for (std::size_t i = 0; i < rows_.rows; ++i) {
    std::int64_t s = 0;
    for (std::int64_t v : rows_.row(i)) s += v * v;
    out[i] = s;
  }
  return out;
}

std::vector<double> Dataset::exact_mean() const {
  std::vector<double> mean(rows_.cols, 0.0);
  for (std::size_t i = 0; i < rows_.rows; ++i) {
    auto r = rows_.row(i);
    for (std::size_t j = 0; j < rows_.cols; ++j) mean[j] += static_cast<double>(r[j]);
  }
  for (double& m : mean) m /= static_cast<double>(rows_.rows);
  return mean;
}

double Dataset::radius() const {
  std::int64_t best = 0;
  for (std::int64_t s : squared_norms()) {
    if (s > best) best = s;
  }
  return std::sqrt(static_cast<double>(best));
}

double Dataset::diameter() const {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < rows_.rows; ++i) {
    auto a = rows_.row(i);
    for (std::size_t j = i + 1; j < rows_.rows; ++j) {
      auto b = rows_.row(j);
      std::int64_t s = 0;
      for (std::size_t k = 0; k < rows_.cols; ++k) {
        const std::int64_t dfr = a[k] - b[k];
        s += dfr * dfr;
      }
      if (s > best) best = s;
    }
  }
  return std::sqrt(static_cast<double>(best));
}

}  // namespace dpmean
