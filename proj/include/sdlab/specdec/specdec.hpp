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

// Draft-then-verify decoding. The draft proposes a block autoregressively,
// the target scores every block position in one sweep, and each proposed
// token x is kept with probability min(1, p(x)/q(x)). The first rejected
// position is replaced by a draw from norm(max(0, p - q)); a fully accepted
// block earns one bonus token from the target. The output distribution is
// exactly the target's.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sdlab/lm/language_model.hpp"
#include "sdlab/sampling/sampling.hpp"

namespace sdlab {

inline constexpr std::size_t kDefaultBlockSize = 4;

struct GenerationConfig {
  Temperature tau_decode{1.0};
  std::size_t block_size = kDefaultBlockSize;
  std::size_t max_new_tokens = 64;
  std::uint64_t seed = 0;

  // Throws DomainError unless block_size >= 1 and max_new_tokens >= 1.
  void validate() const;
};

enum class CorrectionKind { kResample, kBonus, kEos };
std::string_view to_string(CorrectionKind k);

struct SpeculationRound {
  TokenSeq proposed;
  std::size_t accepted_count = 0;
  std::optional<TokenId> correction;
  CorrectionKind kind = CorrectionKind::kBonus;
};

struct SpeculationTrace {
  std::vector<SpeculationRound> rounds;
  std::size_t draft_proposed = 0;
  std::size_t draft_accepted = 0;

  void add(SpeculationRound round);
  // accepted / proposed, bonus tokens excluded. 0 when nothing was proposed.
  double alpha() const;
};

// One line per round:
// round=<i> proposed=<ids,comma> accepted=<n> correction=<id|none> kind=<k>
void write_trace(const SpeculationTrace& trace, std::ostream& out);

// Continuation only (prompt excluded); ends at eos or max_new_tokens.
TokenSeq generate_autoregressive(const LanguageModel& model,
                                 std::span<const TokenId> prompt,
                                 const GenerationConfig& config, Rng& rng);

// norm(max(0, p - q)). Throws DomainError("residual undefined") when the
// positive mass is zero.
ProbDist residual_distribution(const ProbDist& p, const ProbDist& q);

// Σ_x min(p(x), q(x)): the single-position acceptance probability.
double acceptance_probability(const ProbDist& p, const ProbDist& q);

// The distribution of the token emitted at one verified position, composed
// analytically from the accept and resample branches. Equals p.
ProbDist induced_distribution(const ProbDist& p, const ProbDist& q);

struct VerifyOutcome {
  enum class Kind { kResample, kBonus, kNone };
  std::size_t accepted_count = 0;
  std::optional<TokenId> correction;
  Kind kind = Kind::kNone;
};

// target_dists holds proposed.size() entries, optionally followed by the
// target distribution after the block (used for the bonus draw). Consumes
// one uniform per scanned position, then one for the correction draw.
// Throws InternalError if a proposed token has zero draft probability.
VerifyOutcome verify_block(std::span<const ProbDist> target_dists,
                           std::span<const ProbDist> draft_dists,
                           std::span<const TokenId> proposed, Rng& rng);

struct SpeculativeResult {
  TokenSeq tokens;  // continuation only
  SpeculationTrace trace;
};

// Throws ConfigError when the models do not share a vocab.
SpeculativeResult speculative_generate(const LanguageModel& target,
                                       const LanguageModel& draft,
                                       std::span<const TokenId> prompt,
                                       const GenerationConfig& config,
                                       Rng& rng);

}  // namespace sdlab
