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
#include "sdlab/specdec/specdec.hpp"

#include <algorithm>
#include <ostream>

#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"

namespace sdlab {

void GenerationConfig::validate() const {
  if (block_size < 1) throw DomainError("block size must be >= 1");
  if (max_new_tokens < 1) throw DomainError("max_new_tokens must be >= 1");
}

std::string_view to_string(CorrectionKind k) {
  switch (k) {
    case CorrectionKind::kResample: return "resample";
    case CorrectionKind::kBonus: return "bonus";
    case CorrectionKind::kEos: return "eos";
  }
  return "?";
}

void SpeculationTrace::add(SpeculationRound round) {
  draft_proposed += round.proposed.size();
  draft_accepted += round.accepted_count;
  rounds.push_back(std::move(round));
}

double SpeculationTrace::alpha() const {
  if (draft_proposed == 0) return 0.0;
  return static_cast<double>(draft_accepted) /
         static_cast<double>(draft_proposed);
}

void write_trace(const SpeculationTrace& trace, std::ostream& out) {
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    out << "round=" << i << " proposed=";
    for (std::size_t j = 0; j < r.proposed.size(); ++j) {
      if (j) out << ',';
      out << r.proposed[j];
    }
    out << " accepted=" << r.accepted_count << " correction=";
    if (r.correction) {
      out << *r.correction;
    } else {
      out << "none";
    }
    out << " kind=" << to_string(r.kind) << '\n';
  }
}

TokenSeq generate_autoregressive(const LanguageModel& model,
                                 std::span<const TokenId> prompt,
                                 const GenerationConfig& config, Rng& rng) {
  config.validate();
  model.vocab().check(prompt);
  TokenSeq history(prompt.begin(), prompt.end());
  std::vector<double> buf(model.vocab().size);
  for (std::size_t i = 0; i < config.max_new_tokens; ++i) {
    model.forward_into(history, buf);
    softmax_with_temperature_inplace(buf, config.tau_decode);
    const TokenId x = sample(std::span<const double>(buf), rng);
    history.push_back(x);
    if (x == model.vocab().eos_id) break;
  }
  return TokenSeq(history.begin() + static_cast<std::ptrdiff_t>(prompt.size()),
                  history.end());
}

ProbDist residual_distribution(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size()) throw DomainError("distribution size mismatch");
  std::vector<double> out(p.size());
  const double mass = kernels::positive_part(p.probs(), q.probs(), out);
  if (!(mass > 0.0)) throw DomainError("residual undefined");
  kernels::scale(1.0 / mass, out);
  return ProbDist::trusted(std::move(out));
}

double acceptance_probability(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size()) throw DomainError("distribution size mismatch");
  return std::clamp(kernels::sum_min(p.probs(), q.probs()), 0.0, 1.0);
}

ProbDist induced_distribution(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size()) throw DomainError("distribution size mismatch");
  // accept branch: q(x) min(1, p(x)/q(x)) = min(p(x), q(x))
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(p[i], q[i]);
  const double reject = 1.0 - kernels::sum(out);
  std::vector<double> resid(p.size());
  const double mass = kernels::positive_part(p.probs(), q.probs(), resid);
  if (mass > 0.0) kernels::axpy(reject / mass, resid, out);
  return ProbDist::trusted(std::move(out));
}

VerifyOutcome verify_block(std::span<const ProbDist> target_dists,
                           std::span<const ProbDist> draft_dists,
                           std::span<const TokenId> proposed, Rng& rng) {
  const std::size_t n = proposed.size();
  if (draft_dists.size() != n ||
      (target_dists.size() != n && target_dists.size() != n + 1)) {
    throw DomainError("verify_block: list lengths do not line up");
  }
  VerifyOutcome out;
  for (std::size_t i = 0; i < n; ++i) {
    const TokenId x = proposed[i];
    const double q = draft_dists[i][x];
    const double p = target_dists[i][x];
    if (!(q > 0.0)) {
      throw InternalError("draft proposed a token it gave zero probability");
    }
    // u < p/q, written without the division
    if (rng.uniform() * q < p) {
      ++out.accepted_count;
      continue;
    }
    out.correction = sample(
        residual_distribution(target_dists[i], draft_dists[i]), rng);
    out.kind = VerifyOutcome::Kind::kResample;
    return out;
  }
  if (target_dists.size() == n + 1) {
    out.correction = sample(target_dists[n], rng);
    out.kind = VerifyOutcome::Kind::kBonus;
  }
  return out;
}

SpeculativeResult speculative_generate(const LanguageModel& target,
                                       const LanguageModel& draft,
                                       std::span<const TokenId> prompt,
                                       const GenerationConfig& config,
                                       Rng& rng) {
  config.validate();
  if (!(target.vocab() == draft.vocab())) {
    throw ConfigError("target and draft vocabularies differ");
  }
  const Vocab& vocab = target.vocab();
  vocab.check(prompt);
  const std::size_t v = vocab.size;

  SpeculativeResult result;
  TokenSeq history(prompt.begin(), prompt.end());
  std::vector<ProbDist> qdists;
  std::vector<ProbDist> pdists;
  std::vector<double> buf(v);
  std::vector<double> batch;

  std::size_t produced = 0;
  while (produced < config.max_new_tokens) {
    const std::size_t remaining = config.max_new_tokens - produced;
    // leave room for the correction/bonus token
    const std::size_t k = std::min(config.block_size, remaining - 1);
    const std::size_t base = history.size();

    SpeculationRound round;
    qdists.clear();
    for (std::size_t i = 0; i < k; ++i) {
      draft.forward_into(history, buf);
      softmax_with_temperature_inplace(buf, config.tau_decode);
      const TokenId x = sample(std::span<const double>(buf), rng);
      qdists.push_back(ProbDist::trusted(buf));
      round.proposed.push_back(x);
      history.push_back(x);
      if (x == vocab.eos_id) break;
    }
    const std::size_t m = round.proposed.size();
    const bool ends_with_eos = m > 0 && round.proposed.back() == vocab.eos_id;
    const std::size_t scored = ends_with_eos ? m : m + 1;

    batch.resize(scored * v);
    target.forward_batch(history, base, scored, batch);
    pdists.clear();
    for (std::size_t i = 0; i < scored; ++i) {
      std::span<double> row(batch.data() + i * v, v);
      softmax_with_temperature_inplace(row, config.tau_decode);
      pdists.push_back(ProbDist::trusted({row.begin(), row.end()}));
    }

    const VerifyOutcome vo = verify_block(pdists, qdists, round.proposed, rng);
    history.resize(base + vo.accepted_count);
    round.accepted_count = vo.accepted_count;
    round.correction = vo.correction;
    switch (vo.kind) {
      case VerifyOutcome::Kind::kResample:
        round.kind = CorrectionKind::kResample;
        break;
      case VerifyOutcome::Kind::kBonus:
        round.kind = CorrectionKind::kBonus;
        break;
      case VerifyOutcome::Kind::kNone:
        round.kind = CorrectionKind::kEos;
        break;
    }
    if (vo.correction) history.push_back(*vo.correction);
    produced = history.size() - prompt.size();
    result.trace.add(std::move(round));
    if (history.back() == vocab.eos_id && produced > 0) break;
  }
  result.tokens.assign(
      history.begin() + static_cast<std::ptrdiff_t>(prompt.size()),
      history.end());
  return result;
}

}  // namespace sdlab
