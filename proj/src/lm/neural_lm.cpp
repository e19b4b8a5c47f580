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
#include <cmath>
#include <string>

#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"
#include "sdlab/lm/language_model.hpp"
#include "sdlab/sampling/rng.hpp"

namespace sdlab {

TinyNeuralLM::TinyNeuralLM(Vocab vocab, NeuralShape shape)
    : LanguageModel(vocab),
      shape_(shape),
      params_(NeuralParams::zeros(vocab.size, shape)) {
  if (shape.context == 0 || shape.embed == 0 || shape.hidden == 0) {
    throw DomainError("neural shape dimensions must be positive");
  }
}

TinyNeuralLM::TinyNeuralLM(Vocab vocab, NeuralShape shape,
                           std::uint64_t init_seed)
    : TinyNeuralLM(vocab, shape) {
  Rng rng(init_seed);
  for (auto* w : {&params_.embedding, &params_.hidden_w, &params_.output_w}) {
    for (double& x : *w) x = 0.2 * rng.uniform() - 0.1;
  }
}

void TinyNeuralLM::hidden(std::span<const TokenId> context,
                          std::span<double> x, std::span<double> h) const {
  const std::size_t n = shape_.context;
  const std::size_t e = shape_.embed;
  const std::size_t len = context.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t pad = n > len ? n - len : 0;
    const TokenId t = j < pad ? vocab_.bos_id : context[len - n + j];
    const double* emb = params_.embedding.data() + t * e;
    std::copy(emb, emb + e, x.begin() + j * e);
  }
  const auto& k = kernels::active();
  k.gemv(params_.hidden_w.data(), x.data(), params_.hidden_b.data(), h.data(),
         shape_.hidden, n * e);
  for (double& v : h) v = std::tanh(v);
}

void TinyNeuralLM::forward_into(std::span<const TokenId> context,
                                std::span<double> out) const {
  std::vector<double> x(shape_.context * shape_.embed);
  std::vector<double> h(shape_.hidden);
  hidden(context, x, h);
  kernels::active().gemv(params_.output_w.data(), h.data(),
                         params_.output_b.data(), out.data(), vocab_.size,
                         shape_.hidden);
}

GradientBundle TinyNeuralLM::zero_gradient() const {
  return NeuralParams::zeros(vocab_.size, shape_);
}

void TinyNeuralLM::backward(std::span<const TokenId> context,
                            std::span<const double> dlogits, double scale,
                            GradientBundle& acc) const {
  auto& g = std::get<NeuralParams>(acc);
  const std::size_t n = shape_.context;
  const std::size_t e = shape_.embed;
  const std::size_t hd = shape_.hidden;
  const std::size_t v = vocab_.size;
  const auto& k = kernels::active();

  std::vector<double> x(n * e);
  std::vector<double> h(hd);
  hidden(context, x, h);

  // output layer
  k.outer_acc(scale, dlogits.data(), h.data(), g.output_w.data(), v, hd);
  k.axpy(scale, dlogits.data(), g.output_b.data(), v);

  // back through tanh
  std::vector<double> dpre(hd, 0.0);
  k.gemv_t_acc(params_.output_w.data(), dlogits.data(), dpre.data(), v, hd);
  for (std::size_t i = 0; i < hd; ++i) dpre[i] *= 1.0 - h[i] * h[i];

  k.outer_acc(scale, dpre.data(), x.data(), g.hidden_w.data(), hd, n * e);
  k.axpy(scale, dpre.data(), g.hidden_b.data(), hd);

  std::vector<double> dx(n * e, 0.0);
  k.gemv_t_acc(params_.hidden_w.data(), dpre.data(), dx.data(), hd, n * e);
  const std::size_t len = context.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t pad = n > len ? n - len : 0;
    const TokenId t = j < pad ? vocab_.bos_id : context[len - n + j];
    k.axpy(scale, dx.data() + j * e, g.embedding.data() + t * e, e);
  }
}

void TinyNeuralLM::apply_update(const GradientBundle& grads, double lr) {
  const auto* g = std::get_if<NeuralParams>(&grads);
  if (!g) throw ConfigError("gradient does not match neural model");
  auto src = g->named();
  auto dst = params_.named();
  for (std::size_t p = 0; p < src.size(); ++p) {
    if (src[p].values.size() != dst[p].values.size()) {
      throw ConfigError("gradient shape mismatch in " +
                        std::string(src[p].name));
    }
    for (std::size_t i = 0; i < src[p].values.size(); ++i) {
      if (!std::isfinite(src[p].values[i])) {
        throw NumericError("non-finite gradient at neural." +
                           std::string(src[p].name) + "[" + std::to_string(i) +
                           "]");
      }
    }
  }
  if (lr == 0.0) return;
  for (std::size_t p = 0; p < src.size(); ++p) {
    kernels::axpy(-lr, src[p].values, dst[p].values);
  }
}

std::unique_ptr<LanguageModel> TinyNeuralLM::clone() const {
  return std::make_unique<TinyNeuralLM>(*this);
}

}  // namespace sdlab
