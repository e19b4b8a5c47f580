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
#include "sdlab/distill/distill.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"
#include "sdlab/lm/objectives.hpp"
#include "sdlab/specdec/specdec.hpp"

namespace sdlab {
namespace {

// Pair index for a 1-based step: per-epoch Fisher-Yates shuffles.
class PairOrder {
 public:
  PairOrder(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}

  std::size_t at(std::size_t step0) {
    const std::size_t epoch = step0 / n_;
    if (epoch != epoch_ || perm_.empty()) {
      perm_.resize(n_);
      std::iota(perm_.begin(), perm_.end(), std::size_t{0});
      Rng rng(Rng::derive(seed_, {epoch}));
      for (std::size_t i = n_; i > 1; --i) {
        std::swap(perm_[i - 1], perm_[rng.below(i)]);
      }
      epoch_ = epoch;
    }
    return perm_[step0 % n_];
  }

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> perm_;
};

struct StepResult {
  double lm_loss = 0.0;
  double fkl = 0.0;
};

// Accumulates the mean over response positions of
// CE + loss_ratio * FKL into grads. teacher may be null (CE only).
StepResult AccumulatePair(const LanguageModel& student,
                          const LanguageModel* teacher, double loss_ratio,
                          std::span<const TokenId> prompt,
                          std::span<const TokenId> response,
                          GradientBundle& grads) {
  const std::size_t v = student.vocab().size;
  TokenSeq history(prompt.begin(), prompt.end());
  history.insert(history.end(), response.begin(), response.end());
  std::vector<double> logits(v), d_ce(v), d_fkl(v), teacher_buf(v);
  const double inv_len = 1.0 / static_cast<double>(response.size());

  StepResult r;
  for (std::size_t i = 0; i < response.size(); ++i) {
    std::span<const TokenId> ctx(history.data(), prompt.size() + i);
    student.forward_into(ctx, logits);
    r.lm_loss += ce_logit_grad(logits, response[i], d_ce);
    if (teacher) {
      teacher->forward_into(ctx, teacher_buf);
      softmax_with_temperature_inplace(teacher_buf, Temperature(1.0));
      r.fkl += fkl_logit_grad(logits, ProbDist::trusted(teacher_buf), d_fkl);
      kernels::axpy(loss_ratio, d_fkl, d_ce);
    }
    student.backward(ctx, d_ce, inv_len, grads);
  }
  r.lm_loss *= inv_len;
  r.fkl *= inv_len;
  return r;
}

void CheckFinite(double loss, std::size_t step, double lr) {
  if (!std::isfinite(loss)) {
    throw TrainingError("training diverged at step " + std::to_string(step) +
                        " (learning rate " + std::to_string(lr) + ")");
  }
}

}  // namespace

std::string_view to_string(KDMode m) {
  return m == KDMode::kOffline ? "offline" : "online";
}

KDMode parse_kd_mode(std::string_view s) {
  if (s == "offline") return KDMode::kOffline;
  if (s == "online") return KDMode::kOnline;
  throw ParseError("unknown kd mode '" + std::string(s) + "'");
}

void KDConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("kd lambda must be in [0,1]");
  }
  if (!(loss_ratio >= 0.0)) throw DomainError("kd loss_ratio must be >= 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("kd learning_rate must be finite and >= 0");
  }
  if (max_new_tokens < 1) throw DomainError("kd max_new_tokens must be >= 1");
}

void TrainingLog::add(TrainingRecord r) {
  if (!records.empty() && r.step <= records.back().step) {
    throw InternalError("training log steps must be strictly increasing");
  }
  records.push_back(r);
}

void write_training_log(const TrainingLog& log, std::ostream& out) {
  out << "step,lm_loss,fkl\n";
  char buf[96];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", r.step, r.lm_loss,
                  r.fkl);
    out << buf;
  }
}

Dataset generate_dataset(const LanguageModel& model,
                         std::span<const TokenSeq> prompts,
                         std::span<const Temperature> tau_per_prompt,
                         Source source, Rng& rng, std::size_t max_len) {
  Dataset data;
  if (prompts.empty()) return data;
  const std::uint64_t base = rng.next_u64();
  data.pairs.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    GenerationConfig cfg;
    cfg.tau_decode = tau_per_prompt[i];
    cfg.max_new_tokens = max_len;
    Rng sub(Rng::derive(base, {i}));
    DataPair pair;
    pair.prompt = prompts[i];
    pair.response = generate_autoregressive(model, prompts[i], cfg, sub);
    pair.source = source;
    pair.tau_gen = tau_per_prompt[i];
    data.pairs.push_back(std::move(pair));
  }
  return data;
}

Dataset seqkd_generate(const LanguageModel& teacher,
                       std::span<const TokenSeq> prompts, Temperature tau_gen,
                       Rng& rng, std::size_t max_len) {
  std::vector<Temperature> taus(prompts.size(), tau_gen);
  return generate_dataset(teacher, prompts, taus, Source::kTeacher, rng,
                          max_len);
}

Dataset compose_dataset(const LanguageModel& source_model, Source source,
                        std::span<const Temperature> tau_set,
                        std::span<const TokenSeq> prompts, Rng& rng,
                        std::size_t max_len) {
  if (tau_set.empty()) throw DomainError("composition needs a non-empty tau set");
  std::vector<Temperature> taus(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    taus[i] = tau_set[i % tau_set.size()];
  }
  return generate_dataset(source_model, prompts, taus, source, rng, max_len);
}

TrainingLog train_offline(LanguageModel& student, const Dataset& data,
                          const KDConfig& config, const TrainingHooks& hooks) {
  config.validate();
  if (config.mode != KDMode::kOffline) {
    throw ConfigError("train_offline needs mode = offline");
  }
  TrainingLog log;
  if (config.steps == 0) return log;
  if (data.empty()) throw DomainError("offline training on an empty dataset");
  data.validate(student.vocab());

  PairOrder order(data.size(), config.seed);
  const LanguageModel* monitor = hooks.monitor_teacher;
  for (std::size_t s = 0; s < config.steps; ++s) {
    const DataPair& pair = data.pairs[order.at(s)];
    GradientBundle grads = student.zero_gradient();
    StepResult r = AccumulatePair(student, nullptr, 0.0, pair.prompt,
                                  pair.response, grads);
    if (monitor) {
      r.fkl = mean_fkl(*monitor, student, [&] {
        std::vector<TokenSeq> ctxs;
        TokenSeq h = pair.prompt;
        for (TokenId t : pair.response) {
          ctxs.push_back(h);
          h.push_back(t);
        }
        return ctxs;
      }());
    }
    CheckFinite(r.lm_loss, s + 1, config.learning_rate);
    student.apply_update(grads, config.learning_rate);
    TrainingRecord rec{s + 1, r.lm_loss, r.fkl, std::nullopt};
    if (hooks.eval_alpha && hooks.eval_every &&
        ((s + 1) % hooks.eval_every == 0 || s + 1 == config.steps)) {
      rec.eval_alpha = hooks.eval_alpha(student);
    }
    log.add(rec);
  }
  return log;
}

TrainingLog train_online(LanguageModel& student, const LanguageModel& teacher,
                         const Dataset& fixed, const KDConfig& config, Rng& rng,
                         const TrainingHooks& hooks) {
  config.validate();
  if (config.mode != KDMode::kOnline) {
    throw ConfigError("train_online needs mode = online");
  }
  if (!(student.vocab() == teacher.vocab())) {
    throw ConfigError("teacher and student vocabularies differ");
  }
  TrainingLog log;
  if (config.steps == 0) return log;
  if (fixed.empty()) throw DomainError("online training on an empty dataset");
  fixed.validate(student.vocab());

  PairOrder order(fixed.size(), config.seed);
  for (std::size_t s = 0; s < config.steps; ++s) {
    const double mu = rng.uniform_open();
    const std::size_t idx = order.at(s);
    const DataPair& pair = fixed.pairs[idx];
    TokenSeq on_policy;
    std::span<const TokenId> response = pair.response;
    if (mu <= config.lambda) {
      GenerationConfig gen;
      gen.tau_decode = config.tau_set.empty()
                           ? config.tau_gen
                           : config.tau_set[idx % config.tau_set.size()];
      gen.max_new_tokens = config.max_new_tokens;
      on_policy = generate_autoregressive(student, pair.prompt, gen, rng);
      response = on_policy;
    }
    GradientBundle grads = student.zero_gradient();
    const StepResult r = AccumulatePair(student, &teacher, config.loss_ratio,
                                        pair.prompt, response, grads);
    CheckFinite(r.lm_loss + r.fkl, s + 1, config.learning_rate);
    student.apply_update(grads, config.learning_rate);
    TrainingRecord rec{s + 1, r.lm_loss, r.fkl, std::nullopt};
    if (hooks.eval_alpha && hooks.eval_every &&
        ((s + 1) % hooks.eval_every == 0 || s + 1 == config.steps)) {
      rec.eval_alpha = hooks.eval_alpha(student);
    }
    log.add(rec);
  }
  return log;
}

double mean_fkl(const LanguageModel& teacher, const LanguageModel& student,
                std::span<const TokenSeq> contexts) {
  if (contexts.empty()) return 0.0;
  const std::size_t v = teacher.vocab().size;
  std::vector<double> pt(v), ps(v);
  double total = 0.0;
  for (const auto& ctx : contexts) {
    teacher.forward_into(ctx, pt);
    student.forward_into(ctx, ps);
    softmax_with_temperature_inplace(pt, Temperature(1.0));
    softmax_with_temperature_inplace(ps, Temperature(1.0));
    total += fkl_divergence(ProbDist::trusted(pt), ProbDist::trusted(ps));
  }
  return total / static_cast<double>(contexts.size());
}

}  // namespace sdlab
