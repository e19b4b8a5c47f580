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
#include "sdlab/lm/types.hpp"

#include <cmath>
#include <string>

#include "sdlab/errors.hpp"

namespace sdlab {

Vocab Vocab::make(std::size_t size, TokenId bos_id, TokenId eos_id) {
  if (size < 2) throw DomainError("vocab size must be >= 2");
  if (bos_id == eos_id) throw DomainError("bos_id and eos_id must differ");
  if (bos_id >= size || eos_id >= size) {
    throw DomainError("bos_id/eos_id must be < vocab size");
  }
  return Vocab{size, bos_id, eos_id};
}

void Vocab::check(std::span<const TokenId> tokens) const {
  for (TokenId t : tokens) {
    if (t >= size) {
      throw DomainError("token id " + std::to_string(t) +
                        " out of range for vocab of size " +
                        std::to_string(size));
    }
  }
}

LogitVector::LogitVector(std::vector<double> values)
    : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DomainError("logit " + std::to_string(i) + " is not finite");
    }
  }
}

ProbDist ProbDist::from(std::vector<double> probs) {
  if (probs.empty()) throw DomainError("empty distribution");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("probability outside [0,1]");
    }
    s += p;
  }
  if (std::abs(s - 1.0) > kSumTolerance) {
    throw DomainError("probabilities sum to " + std::to_string(s));
  }
  return trusted(std::move(probs));
}

ProbDist ProbDist::one_hot(std::size_t n, std::size_t k) {
  std::vector<double> v(n, 0.0);
  v.at(k) = 1.0;
  return trusted(std::move(v));
}

ProbDist ProbDist::uniform(std::size_t n) {
  return trusted(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::size_t ProbDist::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return best;
}

}  // namespace sdlab
