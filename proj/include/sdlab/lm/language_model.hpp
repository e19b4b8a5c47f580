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

// Autoregressive next-token predictors with exact forward passes and
// analytic gradients. Two families: a logit table indexed by the last n
// tokens, and a tiny tanh MLP over concatenated token embeddings.
//
// Models are read-shareable across threads; training needs exclusive access.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sdlab/lm/types.hpp"

namespace sdlab {

enum class ModelFamily : std::uint32_t { kNGram = 0, kNeural = 1 };

std::string_view to_string(ModelFamily f);
ModelFamily parse_family(std::string_view name);  // "ngram" | "neural"

struct NeuralShape {
  std::size_t context = 3;
  std::size_t embed = 16;
  std::size_t hidden = 64;

  friend bool operator==(const NeuralShape&, const NeuralShape&) = default;
};

// Flat parameter (or gradient) storage for TinyNeuralLM.
//   embedding: vocab x embed
//   hidden_w:  hidden x (context * embed)
//   hidden_b:  hidden
//   output_w:  vocab x hidden
//   output_b:  vocab
struct NeuralParams {
  std::vector<double> embedding;
  std::vector<double> hidden_w;
  std::vector<double> hidden_b;
  std::vector<double> output_w;
  std::vector<double> output_b;

  static NeuralParams zeros(std::size_t vocab, const NeuralShape& shape);

  struct Named {
    std::string_view name;
    std::span<double> values;
  };
  struct ConstNamed {
    std::string_view name;
    std::span<const double> values;
  };
  std::vector<Named> named();
  std::vector<ConstNamed> named() const;

  friend bool operator==(const NeuralParams&, const NeuralParams&) = default;
};

// Sparse per-context logit-row gradients for NGramLogitLM.
struct NGramGradient {
  std::size_t vocab = 0;
  std::unordered_map<std::uint64_t, std::vector<double>> rows;

  std::span<double> row(std::uint64_t key);  // zero-filled on first access
};

using GradientBundle = std::variant<NGramGradient, NeuralParams>;

// into += scale * from. Throws ConfigError on family/shape mismatch.
void accumulate(GradientBundle& into, const GradientBundle& from, double scale);

class LanguageModel {
 public:
  explicit LanguageModel(Vocab vocab) : vocab_(vocab) {}
  virtual ~LanguageModel() = default;

  LanguageModel(const LanguageModel&) = default;
  LanguageModel& operator=(const LanguageModel&) = default;

  virtual ModelFamily family() const = 0;
  const Vocab& vocab() const { return vocab_; }
  // Number of trailing tokens the prediction depends on.
  virtual std::size_t context_length() const = 0;

  // Tokens are validated; throws DomainError on out-of-range ids. Contexts
  // shorter than context_length() are left-padded with bos_id.
  LogitVector forward(std::span<const TokenId> context) const;
  // Writes logits into out (size == vocab) without validating tokens.
  virtual void forward_into(std::span<const TokenId> context,
                            std::span<double> out) const = 0;

  // Logits for the count contexts history[0, first_end + i), i < count, in
  // one sweep. out is count x vocab. Bitwise equal to separate forwards.
  virtual void forward_batch(std::span<const TokenId> history,
                             std::size_t first_end, std::size_t count,
                             std::span<double> out) const;

  virtual GradientBundle zero_gradient() const = 0;
  // acc += scale * dL/dθ, given dL/dlogits at this context.
  virtual void backward(std::span<const TokenId> context,
                        std::span<const double> dlogits, double scale,
                        GradientBundle& acc) const = 0;
  // θ -= lr * grads. Throws NumericError naming the first non-finite
  // gradient entry; the model is left unchanged in that case.
  virtual void apply_update(const GradientBundle& grads, double lr) = 0;

  virtual std::unique_ptr<LanguageModel> clone() const = 0;

 protected:
  Vocab vocab_;
};

class NGramLogitLM final : public LanguageModel {
 public:
  // Throws DomainError when order == 0 or vocab^order overflows 64 bits.
  NGramLogitLM(Vocab vocab, std::size_t order);

  ModelFamily family() const override { return ModelFamily::kNGram; }
  std::size_t context_length() const override { return order_; }
  std::size_t order() const { return order_; }

  void forward_into(std::span<const TokenId> context,
                    std::span<double> out) const override;
  GradientBundle zero_gradient() const override;
  void backward(std::span<const TokenId> context,
                std::span<const double> dlogits, double scale,
                GradientBundle& acc) const override;
  void apply_update(const GradientBundle& grads, double lr) override;
  std::unique_ptr<LanguageModel> clone() const override;

  // Base-vocab packing of the last order() tokens (bos-padded), oldest first.
  std::uint64_t context_key(std::span<const TokenId> context) const;
  std::vector<TokenId> unpack_key(std::uint64_t key) const;

  // Empty span for contexts without a stored row (their logits are zero).
  std::span<const double> row(std::uint64_t key) const;
  std::span<double> mutable_row(std::uint64_t key);  // materializes
  void set_row(std::span<const TokenId> context, const LogitVector& logits);

  using Table = std::unordered_map<std::uint64_t, std::vector<double>>;
  const Table& table() const { return table_; }
  std::vector<std::uint64_t> sorted_keys() const;

 private:
  std::size_t order_;
  Table table_;
};

class TinyNeuralLM final : public LanguageModel {
 public:
  // All parameters zero.
  TinyNeuralLM(Vocab vocab, NeuralShape shape);
  // Weights and biases drawn from a seeded uniform(-0.1, 0.1).
  TinyNeuralLM(Vocab vocab, NeuralShape shape, std::uint64_t init_seed);

  ModelFamily family() const override { return ModelFamily::kNeural; }
  std::size_t context_length() const override { return shape_.context; }
  const NeuralShape& shape() const { return shape_; }

  void forward_into(std::span<const TokenId> context,
                    std::span<double> out) const override;
  GradientBundle zero_gradient() const override;
  void backward(std::span<const TokenId> context,
                std::span<const double> dlogits, double scale,
                GradientBundle& acc) const override;
  void apply_update(const GradientBundle& grads, double lr) override;
  std::unique_ptr<LanguageModel> clone() const override;

  NeuralParams& params() { return params_; }
  const NeuralParams& params() const { return params_; }

 private:
  // x = concatenated embeddings, h = tanh(W1 x + b1)
  void hidden(std::span<const TokenId> context, std::span<double> x,
              std::span<double> h) const;

  NeuralShape shape_;
  NeuralParams params_;
};

// θ = (1 - t) θ_from + t θ_to, for models of identical family and shape.
std::unique_ptr<LanguageModel> interpolate(const LanguageModel& from,
                                           const LanguageModel& to, double t);

// Same family, vocab and shape.
bool same_architecture(const LanguageModel& a, const LanguageModel& b);

}  // namespace sdlab
