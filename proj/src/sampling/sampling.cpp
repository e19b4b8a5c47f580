// Copyright 2026 The sdlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "sdlab/sampling/sampling.hpp"

#include <cmath>
#include <string>

#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"

namespace sdlab {

Temperature::Temperature(double tau) : tau_(tau) {
  if (!std::isfinite(tau) || tau < 0.0) {
    throw DomainError("temperature must be finite and >= 0, got " +
                      std::to_string(tau));
  }
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void softmax_with_temperature_inplace(std::span<double> values,
                                      Temperature tau) {
  if (values.empty()) return;
  if (tau.greedy()) {
    const std::size_t k = argmax(values);
    for (double& v : values) v = 0.0;
    values[k] = 1.0;
    return;
  }
  kernels::softmax_inplace(values, 1.0 / tau.value());
}

ProbDist softmax_with_temperature(const LogitVector& logits, Temperature tau) {
  std::vector<double> v(logits.values().begin(), logits.values().end());
  softmax_with_temperature_inplace(v, tau);
  return ProbDist::trusted(std::move(v));
}

TokenId sample(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = k;
    cum += probs[k];
    if (u < cum) return static_cast<TokenId>(k);
  }
  // u landed in the rounding gap above the accumulated mass.
  return static_cast<TokenId>(last_positive);
}

TokenId sample(const ProbDist& dist, Rng& rng) {
  return sample(dist.probs(), rng);
}

}  // namespace sdlab
