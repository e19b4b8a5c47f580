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

// Knowledge distillation of a draft (student) from a target (teacher).
//
// Offline: the teacher samples responses at tau_gen, the student minimizes
// next-token cross-entropy on them. Online: each step flips a coin with
// P(on-policy) = lambda; on-policy steps regenerate the response with the
// current student at tau_gen, otherwise the fixed pair is used. The loss is
// CE + loss_ratio * KL(teacher || student), the divergence taken at loss
// temperature 1.0 on every response position.
//
// Minibatch size is one pair. Gradients are averaged over response
// positions. Pair order is a per-epoch shuffle derived from KDConfig::seed,
// shared by both modes.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sdlab/distill/dataset.hpp"
#include "sdlab/lm/language_model.hpp"
#include "sdlab/sampling/sampling.hpp"

namespace sdlab {

enum class KDMode { kOffline, kOnline };
std::string_view to_string(KDMode m);
KDMode parse_kd_mode(std::string_view s);

inline constexpr double kDefaultLambda = 0.5;
inline constexpr double kDefaultLossRatio = 1.0;

struct KDConfig {
  KDMode mode = KDMode::kOffline;
  Temperature tau_gen{1.0};
  double lambda = kDefaultLambda;       // online only
  double loss_ratio = kDefaultLossRatio;  // online only
  double learning_rate = 0.5;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::size_t max_new_tokens = 64;  // on-policy and teacher generations
  // Non-empty: on-policy responses for pair i are generated at
  // tau_set[i % size] instead of tau_gen (temperature composition).
  std::vector<Temperature> tau_set;

  void validate() const;
};

struct TrainingRecord {
  std::size_t step = 0;  // 1-based
  double lm_loss = 0.0;
  double fkl = 0.0;  // 0 when no teacher is available
  std::optional<double> eval_alpha;
};

struct TrainingLog {
  std::vector<TrainingRecord> records;
  // Throws InternalError unless steps are strictly increasing.
  void add(TrainingRecord r);
};

// train_log.csv: step,lm_loss,fkl
void write_training_log(const TrainingLog& log, std::ostream& out);

struct TrainingHooks {
  // Offline training has no teacher; supply one here to log FKL. It never
  // influences the update.
  const LanguageModel* monitor_teacher = nullptr;
  std::function<double(const LanguageModel&)> eval_alpha;
  std::size_t eval_every = 0;  // 0 disables
};

// One response per prompt at tau_gen; prompt i uses an Rng substream
// derived from (one draw of rng, i).
Dataset seqkd_generate(const LanguageModel& teacher,
                       std::span<const TokenSeq> prompts, Temperature tau_gen,
                       Rng& rng, std::size_t max_len);

// Generic form used by seqkd_generate and compose_dataset.
Dataset generate_dataset(const LanguageModel& model,
                         std::span<const TokenSeq> prompts,
                         std::span<const Temperature> tau_per_prompt,
                         Source source, Rng& rng, std::size_t max_len);

// Throws TrainingError on a non-finite loss.
TrainingLog train_offline(LanguageModel& student, const Dataset& data,
                          const KDConfig& config,
                          const TrainingHooks& hooks = {});

TrainingLog train_online(LanguageModel& student, const LanguageModel& teacher,
                         const Dataset& fixed, const KDConfig& config, Rng& rng,
                         const TrainingHooks& hooks = {});

// Prompts are dealt round-robin over tau_set; each pair records its tau.
Dataset compose_dataset(const LanguageModel& source_model, Source source,
                        std::span<const Temperature> tau_set,
                        std::span<const TokenSeq> prompts, Rng& rng,
                        std::size_t max_len);

// Mean per-position forward KL(teacher || student) at loss temperature 1.0
// over the given contexts (each context is a full history).
double mean_fkl(const LanguageModel& teacher, const LanguageModel& student,
                std::span<const TokenSeq> contexts);

}  // namespace sdlab
