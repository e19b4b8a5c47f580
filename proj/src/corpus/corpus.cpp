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
#include "sdlab/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "sdlab/errors.hpp"
#include "sdlab/lm/objectives.hpp"
#include "sdlab/specdec/specdec.hpp"

namespace sdlab {
namespace {

constexpr std::size_t kMaxRows = std::size_t{1} << 20;
// Logit for impossible tokens. exp(-1e4) underflows to exactly 0.
constexpr double kImpossible = -1e4;

std::size_t Pow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

// log of a Dirichlet(c, ..., c) draw of length n.
std::vector<double> LogDirichlet(std::size_t n, double c, Rng& rng) {
  std::vector<double> g(n);
  for (auto& x : g) x = rng.log_gamma(c);
  const double m = *std::max_element(g.begin(), g.end());
  double s = 0.0;
  for (double x : g) s += std::exp(x - m);
  const double lse = m + std::log(s);
  for (auto& x : g) x -= lse;
  return g;
}

double Entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace

void CorpusSpec::validate() const {
  (void)vocab();
  if (vocab_size < 3) throw DomainError("corpus vocab needs a content token");
  if (order < 1) throw DomainError("corpus order must be >= 1");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw DomainError("corpus concentration must be finite and > 0");
  }
  if (!(context_weight >= 0.0 && context_weight <= 1.0)) {
    throw DomainError("corpus context_weight must be in [0,1]");
  }
  if (!(eos_prob >= 0.0 && eos_prob < 1.0)) {
    throw DomainError("corpus eos_prob must be in [0,1)");
  }
  const double rows = std::pow(static_cast<double>(vocab_size),
                               static_cast<double>(order));
  if (rows > static_cast<double>(kMaxRows)) {
    throw DomainError("corpus vocab^order exceeds 2^20 rows");
  }
}

std::unique_ptr<NGramLogitLM> build_ground_truth(const CorpusSpec& spec,
                                                 Rng& rng) {
  spec.validate();
  const Vocab vocab = spec.vocab();
  const std::size_t v = vocab.size;
  const std::size_t m = spec.order;

  std::vector<TokenId> content;
  for (TokenId t = 0; t < v; ++t) {
    if (t != vocab.bos_id && t != vocab.eos_id) content.push_back(t);
  }
  const std::size_t nc = content.size();

  // tables[j - 1] has v^j rows, indexed by the last j tokens
  std::vector<std::vector<std::vector<double>>> tables(m);
  std::vector<double> weights(m);
  for (std::size_t j = 1; j <= m; ++j) {
    auto& t = tables[j - 1];
    t.resize(Pow(v, j));
    for (auto& row : t) row = LogDirichlet(nc, spec.concentration, rng);
    if (m == 1) {
      weights[j - 1] = 1.0;
    } else if (j == m) {
      weights[j - 1] = std::sqrt(spec.context_weight);
    } else {
      weights[j - 1] = std::sqrt((1.0 - spec.context_weight) /
                                 static_cast<double>(m - 1));
    }
  }

  auto gt = std::make_unique<NGramLogitLM>(vocab, m);
  const std::size_t rows = Pow(v, m);
  const double log_eos =
      spec.eos_prob > 0.0 ? std::log(spec.eos_prob) : kImpossible;
  const double log_content = std::log1p(-spec.eos_prob);
  std::vector<double> mix(nc);
  for (std::size_t key = 0; key < rows; ++key) {
    std::fill(mix.begin(), mix.end(), 0.0);
    for (std::size_t j = 1; j <= m; ++j) {
      const auto& d = tables[j - 1][key % Pow(v, j)];
      for (std::size_t i = 0; i < nc; ++i) mix[i] += weights[j - 1] * d[i];
    }
    const double mx = *std::max_element(mix.begin(), mix.end());
    double s = 0.0;
    for (double x : mix) s += std::exp(x - mx);
    const double lse = mx + std::log(s);

    auto row = gt->mutable_row(key);
    row[vocab.bos_id] = kImpossible;
    row[vocab.eos_id] = log_eos;
    for (std::size_t i = 0; i < nc; ++i) {
      row[content[i]] = std::max(mix[i] - lse + log_content, kImpossible);
    }
  }
  return gt;
}

std::unique_ptr<NGramLogitLM> build_ground_truth(const CorpusSpec& spec) {
  Rng rng(Rng::derive(spec.seed, {0}));
  return build_ground_truth(spec, rng);
}

std::pair<double, double> heldout_ce(const LanguageModel& ground_truth,
                                     const LanguageModel& model,
                                     std::span<const TokenSeq> contexts) {
  if (contexts.empty()) return {0.0, 0.0};
  const std::size_t v = ground_truth.vocab().size;
  std::vector<double> p(v), l(v);
  double h = 0.0, ce = 0.0;
  for (const auto& ctx : contexts) {
    ground_truth.forward_into(ctx, p);
    softmax_with_temperature_inplace(p, Temperature(1.0));
    model.forward_into(ctx, l);
    const double mx = *std::max_element(l.begin(), l.end());
    double s = 0.0;
    for (double x : l) s += std::exp(x - mx);
    const double lse = mx + std::log(s);
    for (std::size_t i = 0; i < v; ++i) {
      if (p[i] > 0.0) ce -= p[i] * (l[i] - lse);
    }
    h += Entropy(p);
  }
  const double n = static_cast<double>(contexts.size());
  return {h / n, ce / n};
}

TeacherResult pretrain_teacher(const LanguageModel& ground_truth,
                               const CorpusSpec& spec, std::size_t steps,
                               Rng& rng, const TeacherSpec& teacher) {
  const Vocab vocab = ground_truth.vocab();
  TeacherResult result;
  if (teacher.family == ModelFamily::kNGram) {
    if (teacher.order < ground_truth.context_length()) {
      throw DomainError("teacher order is below the ground-truth order");
    }
    result.model = std::make_unique<NGramLogitLM>(vocab, teacher.order);
  } else {
    if (teacher.shape.context < ground_truth.context_length()) {
      throw DomainError("teacher context is below the ground-truth order");
    }
    result.model = std::make_unique<TinyNeuralLM>(
        vocab, teacher.shape, Rng::derive(spec.seed, {2}));
  }
  if (teacher.sequence_len < 1 || teacher.eval_every < 1) {
    throw DomainError("teacher sequence_len and eval_every must be >= 1");
  }

  const std::uint64_t base = rng.next_u64();
  GenerationConfig gen;
  gen.max_new_tokens = teacher.sequence_len;
  {
    Rng held(Rng::derive(base, {0}));
    for (std::size_t i = 0; i < teacher.heldout_sequences; ++i) {
      TokenSeq seq = generate_autoregressive(ground_truth, {}, gen, held);
      for (std::size_t k = 0; k < seq.size(); ++k) {
        result.heldout_contexts.emplace_back(seq.begin(),
                                             seq.begin() + k);
      }
    }
  }
  auto evaluate = [&] {
    auto [h, ce] =
        heldout_ce(ground_truth, *result.model, result.heldout_contexts);
    result.entropy_rate = h;
    result.heldout_ce = ce;
    return ce <= (1.0 + teacher.tolerance) * h;
  };
  if (evaluate() || steps == 0) return result;

  Rng train(Rng::derive(base, {1}));
  LanguageModel& model = *result.model;
  std::vector<double> logits(vocab.size), dlogits(vocab.size);
  for (std::size_t s = 0; s < steps; ++s) {
    const TokenSeq seq = generate_autoregressive(ground_truth, {}, gen, train);
    GradientBundle grads = model.zero_gradient();
    const double inv = 1.0 / static_cast<double>(seq.size());
    double loss = 0.0;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      std::span<const TokenId> ctx(seq.data(), k);
      model.forward_into(ctx, logits);
      loss += ce_logit_grad(logits, seq[k], dlogits);
      model.backward(ctx, dlogits, inv, grads);
    }
    if (!std::isfinite(loss)) {
      throw TrainingError("teacher training diverged at step " +
                          std::to_string(s + 1));
    }
    model.apply_update(grads, teacher.learning_rate);
    result.steps_run = s + 1;
    if ((s + 1) % teacher.eval_every == 0 || s + 1 == steps) {
      if (evaluate()) return result;
    }
  }
  char msg[200];
  std::snprintf(msg, sizeof(msg),
                "teacher did not converge in %zu steps: held-out CE %.6f vs "
                "entropy rate %.6f (gap %.2f%%)",
                steps, result.heldout_ce, result.entropy_rate,
                100.0 * (result.heldout_ce / result.entropy_rate - 1.0));
  throw TrainingError(msg);
}

std::vector<TokenSeq> sample_prompts(const LanguageModel& ground_truth,
                                     std::size_t n, std::size_t len,
                                     Rng& rng) {
  const Vocab& vocab = ground_truth.vocab();
  std::vector<TokenSeq> out;
  out.reserve(n);
  std::vector<double> p(vocab.size);
  for (std::size_t i = 0; i < n; ++i) {
    TokenSeq seq;
    while (seq.size() < len) {
      ground_truth.forward_into(seq, p);
      softmax_with_temperature_inplace(p, Temperature(1.0));
      p[vocab.eos_id] = 0.0;
      double s = 0.0;
      for (double x : p) s += x;
      for (auto& x : p) x /= s;
      seq.push_back(sample(std::span<const double>(p), rng));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

PromptSets make_prompt_sets(const LanguageModel& gt_in,
                            const CorpusSpec& in_domain,
                            const LanguageModel& gt_out,
                            const CorpusSpec& out_domain, Rng& rng) {
  if (!(gt_in.vocab() == gt_out.vocab())) {
    throw DomainError("prompt sets need a shared vocab");
  }
  const std::uint64_t base = rng.next_u64();
  PromptSets sets;
  Rng a(Rng::derive(base, {0}));
  Rng b(Rng::derive(base, {1}));
  sets.in_domain =
      sample_prompts(gt_in, in_domain.n_prompts, in_domain.prompt_len, a);
  sets.out_domain =
      sample_prompts(gt_out, out_domain.n_prompts, out_domain.prompt_len, b);
  return sets;
}

PromptSets make_prompt_sets(const CorpusSpec& in_domain,
                            const CorpusSpec& out_domain, Rng& rng) {
  auto gt_in = build_ground_truth(in_domain);
  auto gt_out = build_ground_truth(out_domain);
  return make_prompt_sets(*gt_in, in_domain, *gt_out, out_domain, rng);
}

double continuation_entropy(const LanguageModel& model,
                            std::span<const TokenSeq> prompts,
                            Temperature tau, Rng& rng,
                            std::size_t max_new_tokens) {
  const std::size_t v = model.vocab().size;
  std::vector<double> logits(v), p(v);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& prompt : prompts) {
    TokenSeq history = prompt;
    for (std::size_t i = 0; i < max_new_tokens; ++i) {
      model.forward_into(history, logits);
      std::copy(logits.begin(), logits.end(), p.begin());
      softmax_with_temperature_inplace(p, Temperature(1.0));
      total += Entropy(p);
      ++count;
      std::copy(logits.begin(), logits.end(), p.begin());
      softmax_with_temperature_inplace(p, tau);
      const TokenId x = sample(std::span<const double>(p), rng);
      history.push_back(x);
      if (x == model.vocab().eos_id) break;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

CorpusSpec out_domain_spec(const CorpusSpec& in_domain,
                           double out_concentration) {
  CorpusSpec out = in_domain;
  out.concentration = out_concentration;
  out.seed = Rng::derive(in_domain.seed, {7});
  return out;
}

CorpusBundle build_corpus(const CorpusSpec& in_domain,
                          const CorpusBuildOptions& options) {
  CorpusBundle b;
  b.in_domain.spec = in_domain;
  b.out_domain.spec = out_domain_spec(in_domain, options.out_concentration);
  b.in_domain.ground_truth = build_ground_truth(b.in_domain.spec);
  b.out_domain.ground_truth = build_ground_truth(b.out_domain.spec);

  Rng train_rng(Rng::derive(in_domain.seed, {1}));
  PromptSets train =
      make_prompt_sets(*b.in_domain.ground_truth, b.in_domain.spec,
                       *b.out_domain.ground_truth, b.out_domain.spec, train_rng);
  CorpusSpec eval_in = b.in_domain.spec;
  CorpusSpec eval_out = b.out_domain.spec;
  eval_in.n_prompts = eval_out.n_prompts = options.n_eval_prompts;
  Rng eval_rng(Rng::derive(in_domain.seed, {3}));
  PromptSets eval = make_prompt_sets(*b.in_domain.ground_truth, eval_in,
                                     *b.out_domain.ground_truth, eval_out,
                                     eval_rng);
  b.in_domain.train_prompts = std::move(train.in_domain);
  b.out_domain.train_prompts = std::move(train.out_domain);
  b.in_domain.eval_prompts = std::move(eval.in_domain);
  b.out_domain.eval_prompts = std::move(eval.out_domain);

  Rng teach_in(Rng::derive(in_domain.seed, {4}));
  Rng teach_out(Rng::derive(in_domain.seed, {5}));
  b.in_domain.teacher =
      pretrain_teacher(*b.in_domain.ground_truth, b.in_domain.spec,
                       options.teacher_steps, teach_in, options.teacher);
  b.out_domain.teacher =
      pretrain_teacher(*b.out_domain.ground_truth, b.out_domain.spec,
                       options.teacher_steps, teach_out, options.teacher);
  return b;
}

}  // namespace sdlab
