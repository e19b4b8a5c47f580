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
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"
#include "sdlab/lm/language_model.hpp"

namespace sdlab {

NGramLogitLM::NGramLogitLM(Vocab vocab, std::size_t order)
    : LanguageModel(vocab), order_(order) {
  if (order == 0) throw DomainError("n-gram order must be >= 1");
  double bits = static_cast<double>(order) *
                std::log2(static_cast<double>(vocab.size));
  if (bits > 63.0) throw DomainError("vocab^order does not fit a 64-bit key");
}

std::uint64_t NGramLogitLM::context_key(
    std::span<const TokenId> context) const {
  std::uint64_t key = 0;
  const std::size_t n = context.size();
  for (std::size_t j = 0; j < order_; ++j) {
    // j-th slot of the window, oldest first
    const std::size_t pad = order_ > n ? order_ - n : 0;
    TokenId t = j < pad ? vocab_.bos_id : context[n - order_ + j];
    key = key * vocab_.size + t;
  }
  return key;
}

std::vector<TokenId> NGramLogitLM::unpack_key(std::uint64_t key) const {
  std::vector<TokenId> out(order_);
  for (std::size_t j = order_; j-- > 0;) {
    out[j] = static_cast<TokenId>(key % vocab_.size);
    key /= vocab_.size;
  }
  return out;
}

std::span<const double> NGramLogitLM::row(std::uint64_t key) const {
  auto it = table_.find(key);
  if (it == table_.end()) return {};
  return it->second;
}

std::span<double> NGramLogitLM::mutable_row(std::uint64_t key) {
  auto [it, inserted] = table_.try_emplace(key);
  if (inserted) it->second.assign(vocab_.size, 0.0);
  return it->second;
}

void NGramLogitLM::set_row(std::span<const TokenId> context,
                           const LogitVector& logits) {
  vocab_.check(context);
  if (logits.size() != vocab_.size) {
    throw DomainError("logit row length must equal vocab size");
  }
  auto dst = mutable_row(context_key(context));
  std::copy(logits.values().begin(), logits.values().end(), dst.begin());
}

std::vector<std::uint64_t> NGramLogitLM::sorted_keys() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(table_.size());
  for (const auto& kv : table_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

void NGramLogitLM::forward_into(std::span<const TokenId> context,
                                std::span<double> out) const {
  auto r = row(context_key(context));
  if (r.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
  } else {
    std::copy(r.begin(), r.end(), out.begin());
  }
}

GradientBundle NGramLogitLM::zero_gradient() const {
  return NGramGradient{vocab_.size, {}};
}

void NGramLogitLM::backward(std::span<const TokenId> context,
                            std::span<const double> dlogits, double scale,
                            GradientBundle& acc) const {
  auto& g = std::get<NGramGradient>(acc);
  kernels::axpy(scale, dlogits, g.row(context_key(context)));
}

void NGramLogitLM::apply_update(const GradientBundle& grads, double lr) {
  const auto* g = std::get_if<NGramGradient>(&grads);
  if (!g || g->vocab != vocab_.size) {
    throw ConfigError("gradient does not match n-gram model");
  }
  for (const auto& [key, row_grad] : g->rows) {
    if (row_grad.size() != vocab_.size) {
      throw ConfigError("gradient row length mismatch");
    }
    for (std::size_t i = 0; i < row_grad.size(); ++i) {
      if (!std::isfinite(row_grad[i])) {
        std::string ctx;
        for (TokenId t : unpack_key(key)) {
          ctx += (ctx.empty() ? "" : ",") + std::to_string(t);
        }
        throw NumericError("non-finite gradient at ngram.table[" + ctx + "][" +
                           std::to_string(i) + "]");
      }
    }
  }
  if (lr == 0.0) return;
  for (const auto& [key, row_grad] : g->rows) {
    kernels::axpy(-lr, row_grad, mutable_row(key));
  }
}

std::unique_ptr<LanguageModel> NGramLogitLM::clone() const {
  return std::make_unique<NGramLogitLM>(*this);
}

}  // namespace sdlab
