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

// Synthetic corpora. A ground truth is an order-m Markov chain over the
// vocab, stored as an NGramLogitLM of log-probabilities. Each content row
// is a geometric mixture of Dirichlet(c) draws: one per suffix length
// 1..m, so contexts that share recent tokens share part of their
// next-token distribution. context_weight = 1 gives plain independent
// Dirichlet rows. Lower c gives peakier rows.
//
// bos never follows anything; eos takes a fixed share of every row.

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "sdlab/lm/language_model.hpp"
#include "sdlab/sampling/sampling.hpp"

namespace sdlab {

struct CorpusSpec {
  std::size_t vocab_size = 32;
  TokenId bos_id = 0;
  TokenId eos_id = 1;
  std::size_t order = 2;
  double concentration = 1.0;
  double context_weight = 0.25;
  double eos_prob = 0.02;
  std::size_t n_prompts = 200;
  std::size_t prompt_len = 8;
  std::uint64_t seed = 1;

  Vocab vocab() const { return Vocab::make(vocab_size, bos_id, eos_id); }
  // Throws DomainError on m < 1, c <= 0, weights or eos_prob outside
  // their ranges, or more than 2^20 rows.
  void validate() const;
};

// Rows for every context, seed-deterministic in rng.
std::unique_ptr<NGramLogitLM> build_ground_truth(const CorpusSpec& spec,
                                                 Rng& rng);
// Uses the stream derived from spec.seed.
std::unique_ptr<NGramLogitLM> build_ground_truth(const CorpusSpec& spec);

struct TeacherSpec {
  ModelFamily family = ModelFamily::kNGram;
  std::size_t order = 2;  // n-gram only
  NeuralShape shape;      // neural only
  double learning_rate = 2.0;
  std::size_t eval_every = 500;
  std::size_t heldout_sequences = 200;
  std::size_t sequence_len = 64;
  double tolerance = 0.05;  // relative CE gap that ends training
};

struct TeacherResult {
  std::unique_ptr<LanguageModel> model;
  double heldout_ce = 0.0;    // exact cross-entropy vs ground truth, nats
  double entropy_rate = 0.0;  // ground-truth entropy over the same contexts
  std::size_t steps_run = 0;
  std::vector<TokenSeq> heldout_contexts;
};

// CE-trains a fresh teacher (zero-initialized) on sequences sampled from
// the ground truth, one sequence per step, until the held-out CE is within
// tolerance of the entropy rate. steps = 0 returns the initialization.
// Throws TrainingError with the final gap when the budget runs out, and
// DomainError when the teacher cannot represent the ground truth.
TeacherResult pretrain_teacher(const LanguageModel& ground_truth,
                               const CorpusSpec& spec, std::size_t steps,
                               Rng& rng, const TeacherSpec& teacher = {});

// Per-context ground-truth entropy and teacher cross-entropy, averaged
// over the given contexts.
std::pair<double, double> heldout_ce(const LanguageModel& ground_truth,
                                     const LanguageModel& model,
                                     std::span<const TokenSeq> contexts);

// n prompts of spec.prompt_len tokens sampled at tau 1 with eos banned,
// started from an empty history.
std::vector<TokenSeq> sample_prompts(const LanguageModel& ground_truth,
                                     std::size_t n, std::size_t len, Rng& rng);

struct PromptSets {
  std::vector<TokenSeq> in_domain;
  std::vector<TokenSeq> out_domain;
};

// Prompts from each spec's own ground truth, on disjoint substreams of rng.
PromptSets make_prompt_sets(const CorpusSpec& in_domain,
                            const CorpusSpec& out_domain, Rng& rng);
PromptSets make_prompt_sets(const LanguageModel& gt_in,
                            const CorpusSpec& in_domain,
                            const LanguageModel& gt_out,
                            const CorpusSpec& out_domain, Rng& rng);

// Mean per-token entropy (nats, at temperature 1) of model's next-token
// distribution along continuations it samples at tau.
double continuation_entropy(const LanguageModel& model,
                            std::span<const TokenSeq> prompts,
                            Temperature tau, Rng& rng,
                            std::size_t max_new_tokens);

// Everything one domain needs for distillation experiments.
struct Domain {
  CorpusSpec spec;
  std::unique_ptr<NGramLogitLM> ground_truth;
  TeacherResult teacher;
  std::vector<TokenSeq> train_prompts;
  std::vector<TokenSeq> eval_prompts;
};

struct CorpusBundle {
  Domain in_domain;
  Domain out_domain;
};

struct CorpusBuildOptions {
  TeacherSpec teacher;
  std::size_t teacher_steps = 20000;
  std::size_t n_eval_prompts = 50;
  double out_concentration = 0.05;
};

// The out-of-domain spec: same vocab and shape, its own concentration and
// a seed derived from the in-domain one.
CorpusSpec out_domain_spec(const CorpusSpec& in_domain,
                           double out_concentration);

// Ground truths, teachers, and train/eval prompt sets for both domains.
// All randomness derives from in_domain.seed.
CorpusBundle build_corpus(const CorpusSpec& in_domain,
                          const CorpusBuildOptions& options);

}  // namespace sdlab
