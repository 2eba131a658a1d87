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

#include <span>
#include <vector>

#include "dpmean/random.hpp"

namespace dpmean {

// Noise stddev of the Gaussian mechanism at l2-sensitivity gs under
// rho-zCDP: variance gs^2 / (2 rho) per coordinate.
double gaussian_mechanism_sigma(double gs, double rho);

// Releases value + N(0, gs^2/(2 rho) I). gs = 0 returns the value exactly.
std::vector<double> gaussian_mechanism(std::span<const double> value, double gs,
                                       double rho, Rng& rng);

}  // namespace dpmean
