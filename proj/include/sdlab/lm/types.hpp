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

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sdlab {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

struct Vocab {
  std::size_t size = 0;
  TokenId bos_id = 0;
  TokenId eos_id = 1;

  // Throws DomainError unless size >= 2, bos != eos, both < size.
  static Vocab make(std::size_t size, TokenId bos_id, TokenId eos_id);

  bool contains(TokenId t) const { return t < size; }
  // Throws DomainError naming the offending token.
  void check(std::span<const TokenId> tokens) const;

  friend bool operator==(const Vocab&, const Vocab&) = default;
};

// Raw logits, one per vocab entry. Every entry is finite.
class LogitVector {
 public:
  LogitVector() = default;
  explicit LogitVector(std::size_t n) : values_(n, 0.0) {}
  // Throws DomainError on non-finite entries.
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  std::vector<double> release() && { return std::move(values_); }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> values_;
};

// A normalized probability vector: entries in [0,1], sum within 1e-9 of 1.
class ProbDist {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ProbDist() = default;
  // Validates. Throws DomainError.
  static ProbDist from(std::vector<double> probs);
  // For values produced by a normalizing kernel; skips validation.
  static ProbDist trusted(std::vector<double> probs) {
    ProbDist d;
    d.probs_ = std::move(probs);
    return d;
  }
  static ProbDist one_hot(std::size_t n, std::size_t k);
  static ProbDist uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  std::size_t argmax() const;  // lowest index among ties

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  std::vector<double> probs_;
};

}  // namespace sdlab
