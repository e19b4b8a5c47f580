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
#include "sdlab/lm/language_model.hpp"

#include <string>

#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"

namespace sdlab {

std::string_view to_string(ModelFamily f) {
  return f == ModelFamily::kNGram ? "ngram" : "neural";
}

ModelFamily parse_family(std::string_view name) {
  if (name == "ngram") return ModelFamily::kNGram;
  if (name == "neural") return ModelFamily::kNeural;
  throw ParseError("unknown model family '" + std::string(name) + "'");
}

NeuralParams NeuralParams::zeros(std::size_t vocab, const NeuralShape& s) {
  NeuralParams p;
  p.embedding.assign(vocab * s.embed, 0.0);
  p.hidden_w.assign(s.hidden * s.context * s.embed, 0.0);
  p.hidden_b.assign(s.hidden, 0.0);
  p.output_w.assign(vocab * s.hidden, 0.0);
  p.output_b.assign(vocab, 0.0);
  return p;
}

std::vector<NeuralParams::Named> NeuralParams::named() {
  return {{"embedding", embedding},
          {"hidden_w", hidden_w},
          {"hidden_b", hidden_b},
          {"output_w", output_w},
          {"output_b", output_b}};
}

std::vector<NeuralParams::ConstNamed> NeuralParams::named() const {
  return {{"embedding", embedding},
          {"hidden_w", hidden_w},
          {"hidden_b", hidden_b},
          {"output_w", output_w},
          {"output_b", output_b}};
}

std::span<double> NGramGradient::row(std::uint64_t key) {
  auto [it, inserted] = rows.try_emplace(key);
  if (inserted) it->second.assign(vocab, 0.0);
  return it->second;
}

void accumulate(GradientBundle& into, const GradientBundle& from,
                double scale) {
  if (into.index() != from.index()) {
    throw ConfigError("gradient family mismatch");
  }
  if (auto* dst = std::get_if<NGramGradient>(&into)) {
    const auto& src = std::get<NGramGradient>(from);
    if (dst->vocab != src.vocab) throw ConfigError("gradient vocab mismatch");
    for (const auto& [key, g] : src.rows) {
      kernels::axpy(scale, g, dst->row(key));
    }
    return;
  }
  auto dst = std::get<NeuralParams>(into).named();
  auto src = std::get<NeuralParams>(from).named();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].values.size() != src[i].values.size()) {
      throw ConfigError("gradient shape mismatch in " +
                        std::string(dst[i].name));
    }
    kernels::axpy(scale, src[i].values, dst[i].values);
  }
}

LogitVector LanguageModel::forward(std::span<const TokenId> context) const {
  vocab_.check(context);
  LogitVector out(vocab_.size);
  forward_into(context, out.mutable_values());
  return out;
}

void LanguageModel::forward_batch(std::span<const TokenId> history,
                                  std::size_t first_end, std::size_t count,
                                  std::span<double> out) const {
  const std::size_t v = vocab_.size;
  for (std::size_t i = 0; i < count; ++i) {
    forward_into(history.first(first_end + i), out.subspan(i * v, v));
  }
}

bool same_architecture(const LanguageModel& a, const LanguageModel& b) {
  if (a.family() != b.family() || !(a.vocab() == b.vocab())) return false;
  if (a.family() == ModelFamily::kNGram) {
    return static_cast<const NGramLogitLM&>(a).order() ==
           static_cast<const NGramLogitLM&>(b).order();
  }
  return static_cast<const TinyNeuralLM&>(a).shape() ==
         static_cast<const TinyNeuralLM&>(b).shape();
}

std::unique_ptr<LanguageModel> interpolate(const LanguageModel& from,
                                           const LanguageModel& to, double t) {
  if (!same_architecture(from, to)) {
    throw ConfigError("interpolate needs models of identical architecture");
  }
  auto out = from.clone();
  if (from.family() == ModelFamily::kNGram) {
    auto& dst = static_cast<NGramLogitLM&>(*out);
    const auto& a = static_cast<const NGramLogitLM&>(from);
    const auto& b = static_cast<const NGramLogitLM&>(to);
    for (std::uint64_t key : a.sorted_keys()) {
      kernels::scale(1.0 - t, dst.mutable_row(key));
    }
    for (std::uint64_t key : b.sorted_keys()) {
      kernels::axpy(t, b.row(key), dst.mutable_row(key));
    }
    return out;
  }
  auto& dst = static_cast<TinyNeuralLM&>(*out).params();
  const auto& b = static_cast<const TinyNeuralLM&>(to).params();
  auto d = dst.named();
  auto s = b.named();
  for (std::size_t i = 0; i < d.size(); ++i) {
    kernels::scale(1.0 - t, d[i].values);
    kernels::axpy(t, s[i].values, d[i].values);
  }
  return out;
}

}  // namespace sdlab
