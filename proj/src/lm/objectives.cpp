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
#include "sdlab/lm/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "sdlab/errors.hpp"
#include "sdlab/sampling/sampling.hpp"

namespace sdlab {
namespace {

double LogSumExp(std::span<const double> l) {
  const double m = *std::max_element(l.begin(), l.end());
  double s = 0.0;
  for (double x : l) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double ce_logit_grad(std::span<const double> logits, TokenId target,
                     std::span<double> dlogits) {
  if (target >= logits.size()) throw DomainError("target token out of range");
  std::copy(logits.begin(), logits.end(), dlogits.begin());
  softmax_with_temperature_inplace(dlogits, Temperature(1.0));
  dlogits[target] -= 1.0;
  return LogSumExp(logits) - logits[target];
}

double fkl_divergence(const ProbDist& teacher, const ProbDist& student) {
  double div = 0.0;
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    const double p = teacher[i];
    if (p <= 0.0) continue;
    div += p * (std::log(p) - std::log(std::max(student[i], kFklProbFloor)));
  }
  return div;
}

double fkl_logit_grad(std::span<const double> logits, const ProbDist& teacher,
                      std::span<double> dlogits) {
  if (teacher.size() != logits.size()) {
    throw DomainError("teacher distribution length must equal vocab size");
  }
  std::copy(logits.begin(), logits.end(), dlogits.begin());
  softmax_with_temperature_inplace(dlogits, Temperature(1.0));
  const double div = fkl_divergence(
      teacher, ProbDist::trusted({dlogits.begin(), dlogits.end()}));
  for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits[i] -= teacher[i];
  return div;
}

LossAndGrad ce_gradient(const LanguageModel& model,
                        std::span<const TokenId> context, TokenId target) {
  if (!model.vocab().contains(target)) {
    throw DomainError("target token out of range");
  }
  const LogitVector logits = model.forward(context);
  std::vector<double> d(logits.size());
  LossAndGrad out{ce_logit_grad(logits.values(), target, d),
                  model.zero_gradient()};
  model.backward(context, d, 1.0, out.grads);
  return out;
}

LossAndGrad fkl_gradient(const LanguageModel& student,
                         std::span<const TokenId> context,
                         const ProbDist& teacher_probs) {
  const LogitVector logits = student.forward(context);
  std::vector<double> d(logits.size());
  LossAndGrad out{fkl_logit_grad(logits.values(), teacher_probs, d),
                  student.zero_gradient()};
  student.backward(context, d, 1.0, out.grads);
  return out;
}

}  // namespace sdlab
