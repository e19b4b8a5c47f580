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
#pragma once

// Temperature-scaled softmax and categorical sampling. Every component that
// turns logits into a distribution goes through softmax_with_temperature.

#include <span>

#include "sdlab/lm/types.hpp"
#include "sdlab/sampling/rng.hpp"

namespace sdlab {

// tau >= 0; tau == 0 means greedy (one-hot on the argmax, lowest id wins).
class Temperature {
 public:
  constexpr Temperature() = default;
  // Throws DomainError for negative or non-finite values.
  explicit Temperature(double tau);

  double value() const { return tau_; }
  bool greedy() const { return tau_ == 0.0; }

  friend bool operator==(Temperature, Temperature) = default;

 private:
  double tau_ = 1.0;
};

// probs[k] = exp(l_k / tau) / Σ_i exp(l_i / tau), with max-subtraction.
ProbDist softmax_with_temperature(const LogitVector& logits, Temperature tau);
// In-place variant over raw storage, for hot loops.
void softmax_with_temperature_inplace(std::span<double> values,
                                      Temperature tau);

// Lowest index of the maximum.
std::size_t argmax(std::span<const double> values);

// Inverse-CDF draw. Consumes exactly one uniform from rng. The returned
// token always has positive probability.
TokenId sample(const ProbDist& dist, Rng& rng);
TokenId sample(std::span<const double> probs, Rng& rng);

}  // namespace sdlab
