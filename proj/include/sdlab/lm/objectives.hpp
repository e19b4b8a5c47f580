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

// Per-position training objectives and the parameter update step.
// Divergences are always evaluated at loss temperature 1.0.

#include <span>

#include "sdlab/lm/language_model.hpp"

namespace sdlab {

// Student probabilities are clamped below at this value inside the FKL log.
inline constexpr double kFklProbFloor = 1e-12;

struct LossAndGrad {
  double loss = 0.0;
  GradientBundle grads;
};

// loss = -log softmax(logits)[target]; dlogits = softmax(logits) - onehot.
double ce_logit_grad(std::span<const double> logits, TokenId target,
                     std::span<double> dlogits);

// div = Σ p_t ln(p_t / max(p_s, floor)) with 0 ln 0 = 0;
// dlogits = softmax(logits) - p_t.
double fkl_logit_grad(std::span<const double> logits, const ProbDist& teacher,
                      std::span<double> dlogits);

// Forward KL(teacher || softmax(logits)) without the gradient.
double fkl_divergence(const ProbDist& teacher, const ProbDist& student);

LossAndGrad ce_gradient(const LanguageModel& model,
                        std::span<const TokenId> context, TokenId target);
LossAndGrad fkl_gradient(const LanguageModel& student,
                         std::span<const TokenId> context,
                         const ProbDist& teacher_probs);

inline void apply_update(LanguageModel& model, const GradientBundle& grads,
                         double learning_rate) {
  model.apply_update(grads, learning_rate);
}

}  // namespace sdlab
