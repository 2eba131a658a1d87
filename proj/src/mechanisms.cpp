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

#include "dpmean/mechanisms.hpp"

#include <cmath>

#include "dpmean/errors.hpp"

namespace dpmean {

double gaussian_mechanism_sigma(double gs, double rho) {
  if (!(gs >= 0.0) || !std::isfinite(gs)) {
    throw ConfigError("gaussian mechanism requires gs >= 0");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ConfigError("gaussian mechanism requires rho > 0");
  }
  return std::sqrt(gs * gs / (2.0 * rho));
}

std::vector<double> gaussian_mechanism(std::span<const double> value, double gs,
                                       double rho, Rng& rng) {
  const double sigma = gaussian_mechanism_sigma(gs, rho);
  std::vector<double> out(value.begin(), value.end());
  if (sigma == 0.0) return out;
  for (double& v : out) v += rng.noise(sigma);
  return out;
}

}  // namespace dpmean
