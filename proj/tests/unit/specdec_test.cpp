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

#include <cmath>
#include <map>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "sdlab/errors.hpp"

namespace sdlab {
namespace {

const Vocab kVocab = Vocab::make(5, 0, 1);

std::vector<double> RandomVec(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// Bigram model with a random row for every context. eos gets eos_logit.
NGramLogitLM RandomBigram(std::uint64_t seed, double eos_logit = 0.0) {
  Rng rng(seed);
  NGramLogitLM m(kVocab, 1);
  for (TokenId t = 0; t < kVocab.size; ++t) {
    auto row = RandomVec(rng, kVocab.size, 1.0);
    row[kVocab.eos_id] = eos_logit;
    m.set_row(TokenSeq{t}, LogitVector(row));
  }
  return m;
}

std::vector<double> ToVec(const ProbDist& d) {
  return {d.probs().begin(), d.probs().end()};
}

TEST(Residual, InducedDistributionEqualsTarget) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::Softmax(RandomVec(rng, 8, 2.0), 1.0);
    const auto q = oracle::Softmax(RandomVec(rng, 8, 2.0), 1.0);
    const auto induced = induced_distribution(ProbDist::from(p), ProbDist::from(q));
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(induced[i], p[i], 1e-12);
  }
  const auto p = ProbDist::from({0.2, 0.3, 0.5});
  EXPECT_EQ(ToVec(induced_distribution(p, p)), ToVec(p));
}

TEST(Residual, MatchesOracleAndRejectsIdentical) {
  const auto p = ProbDist::from({0.5, 0.3, 0.2});
  const auto q = ProbDist::from({0.2, 0.3, 0.5});
  const auto r = residual_distribution(p, q);
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_EQ(r[1], 0.0);
  EXPECT_EQ(r[2], 0.0);
  try {
    residual_distribution(p, p);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("residual undefined"), std::string::npos);
  }
}

TEST(Residual, AcceptanceProbabilityIsOverlap) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = oracle::Softmax(RandomVec(rng, 6, 2.0), 1.0);
    const auto q = oracle::Softmax(RandomVec(rng, 6, 2.0), 1.0);
    EXPECT_NEAR(acceptance_probability(ProbDist::from(p), ProbDist::from(q)),
                oracle::Overlap(p, q), 1e-14);
  }
}

TEST(Verify, SinglePositionOutputFollowsTarget) {
  const auto p = ProbDist::from({0.1, 0.4, 0.0, 0.3, 0.2});
  const auto q = ProbDist::from({0.3, 0.1, 0.2, 0.1, 0.3});
  Rng rng(3);
  const int n = 100000;
  std::vector<int> counts(p.size(), 0);
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    const TokenId x = sample(q, rng);
    const std::vector<ProbDist> ps = {p}, qs = {q};
    const TokenSeq prop = {x};
    const auto vo = verify_block(ps, qs, prop, rng);
    accepted += static_cast<int>(vo.accepted_count);
    ++counts[vo.accepted_count == 1 ? x : *vo.correction];
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(counts[k], n * p[k], oracle::ThreeSigma(p[k], n) + 1e-9);
  }
  const double beta = oracle::Overlap(ToVec(p), ToVec(q));
  EXPECT_NEAR(accepted, n * beta, oracle::ThreeSigma(beta, n));
}

TEST(Verify, ZeroDraftProbabilityIsInternalError) {
  const std::vector<ProbDist> ps = {ProbDist::from({0.5, 0.5})};
  const std::vector<ProbDist> qs = {ProbDist::from({1.0, 0.0})};
  const TokenSeq prop = {1};
  Rng rng(4);
  EXPECT_THROW(verify_block(ps, qs, prop, rng), InternalError);
}

TEST(Verify, BonusOnlyWhenTargetHasExtraPosition) {
  const auto p = ProbDist::from({0.5, 0.5});
  const TokenSeq prop = {1};
  Rng rng(5);
  const std::vector<ProbDist> with_bonus = {p, p}, without = {p}, qs = {p};
  const auto a = verify_block(with_bonus, qs, prop, rng);
  EXPECT_EQ(a.kind, VerifyOutcome::Kind::kBonus);
  EXPECT_TRUE(a.correction.has_value());
  const auto b = verify_block(without, qs, prop, rng);
  EXPECT_EQ(b.kind, VerifyOutcome::Kind::kNone);
  EXPECT_FALSE(b.correction.has_value());
}

// Exact probability of a continuation under the target, by the oracle.
double SequenceProbability(const LanguageModel& m, const TokenSeq& prompt,
                           const TokenSeq& cont, double tau) {
  TokenSeq h = prompt;
  double prob = 1.0;
  for (TokenId t : cont) {
    const auto l = m.forward(h);
    prob *= oracle::Softmax({l.values().begin(), l.values().end()}, tau)[t];
    h.push_back(t);
  }
  return prob;
}

TEST(Speculative, OutputDistributionEqualsTarget) {
  const auto target = RandomBigram(11, 0.5);
  const auto draft = RandomBigram(12, -0.5);
  const TokenSeq prompt = {3};
  GenerationConfig cfg;
  cfg.tau_decode = Temperature(0.8);
  cfg.block_size = 2;
  cfg.max_new_tokens = 3;
  Rng rng(6);
  const int n = 100000;
  std::map<TokenSeq, int> counts;
  for (int i = 0; i < n; ++i) {
    ++counts[speculative_generate(target, draft, prompt, cfg, rng).tokens];
  }
  double total = 0.0;
  for (const auto& [seq, c] : counts) {
    ASSERT_LE(seq.size(), 3u);
    const double p = SequenceProbability(target, prompt, seq, 0.8);
    total += p;
    EXPECT_NEAR(c, n * p, oracle::ThreeSigma(p, n) + 1.0) << "length " << seq.size();
  }
  EXPECT_GT(total, 0.99);
}

TEST(Speculative, GreedyMatchesAutoregressive) {
  const auto target = RandomBigram(21, -3.0);
  const auto draft = RandomBigram(22, -3.0);
  GenerationConfig cfg;
  cfg.tau_decode = Temperature(0.0);
  cfg.max_new_tokens = 40;
  for (TokenId start = 2; start < kVocab.size; ++start) {
    const TokenSeq prompt = {start};
    Rng a(1), b(2);
    EXPECT_EQ(speculative_generate(target, draft, prompt, cfg, a).tokens,
              generate_autoregressive(target, prompt, cfg, b));
  }
}

TEST(Speculative, IdenticalDraftAcceptsEverything) {
  const auto target = RandomBigram(31, -4.0);
  for (double tau : {0.0, 0.5, 1.0}) {
    GenerationConfig cfg;
    cfg.tau_decode = Temperature(tau);
    cfg.max_new_tokens = 64;
    Rng rng(7);
    const TokenSeq prompt = {2, 3};
    const auto r = speculative_generate(target, target, prompt, cfg, rng);
    EXPECT_GT(r.trace.draft_proposed, 0u);
    EXPECT_EQ(r.trace.alpha(), 1.0);
  }
}

TEST(Speculative, DisagreeingGreedyDraftAcceptsNothing) {
  NGramLogitLM target(kVocab, 1), draft(kVocab, 1);
  for (TokenId t = 0; t < kVocab.size; ++t) {
    target.set_row(TokenSeq{t}, LogitVector(std::vector<double>{0, 0, 3, 1, 0}));
    draft.set_row(TokenSeq{t}, LogitVector(std::vector<double>{0, 0, 1, 3, 0}));
  }
  GenerationConfig cfg;
  cfg.tau_decode = Temperature(0.0);
  cfg.max_new_tokens = 20;
  Rng rng(8);
  const auto r = speculative_generate(target, draft, TokenSeq{2}, cfg, rng);
  EXPECT_GT(r.trace.draft_proposed, 0u);
  EXPECT_EQ(r.trace.draft_accepted, 0u);
  EXPECT_EQ(r.trace.alpha(), 0.0);
  EXPECT_EQ(r.tokens, TokenSeq(20, 2));
}

TEST(Speculative, TraceAccountsForEveryToken) {
  const auto target = RandomBigram(41, -1.0);
  const auto draft = RandomBigram(42, -1.0);
  GenerationConfig cfg;
  cfg.max_new_tokens = 30;
  cfg.block_size = 3;
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = speculative_generate(target, draft, TokenSeq{4}, cfg, rng);
    ASSERT_LE(r.tokens.size(), cfg.max_new_tokens);
    ASSERT_GE(r.tokens.size(), 1u);
    if (r.tokens.size() < cfg.max_new_tokens) {
      EXPECT_EQ(r.tokens.back(), kVocab.eos_id);
    }
    for (std::size_t i = 0; i + 1 < r.tokens.size(); ++i) {
      EXPECT_NE(r.tokens[i], kVocab.eos_id);
    }
    std::size_t emitted = 0;
    for (const auto& round : r.trace.rounds) {
      EXPECT_LE(round.proposed.size(), cfg.block_size);
      EXPECT_LE(round.accepted_count, round.proposed.size());
      emitted += round.accepted_count + (round.correction ? 1 : 0);
    }
    EXPECT_EQ(emitted, r.tokens.size());

    std::ostringstream out;
    write_trace(r.trace, out);
    std::istringstream in(out.str());
    const auto c = oracle::CountTraceText(in);
    EXPECT_EQ(c.proposed, r.trace.draft_proposed);
    EXPECT_EQ(c.accepted, r.trace.draft_accepted);
    EXPECT_EQ(c.rounds, r.trace.rounds.size());
  }
}

TEST(Speculative, BlockSizeOneAndTinyBudget) {
  const auto target = RandomBigram(51, -5.0);
  const auto draft = RandomBigram(52, -5.0);
  GenerationConfig cfg;
  cfg.block_size = 1;
  cfg.max_new_tokens = 1;
  Rng rng(10);
  const auto r = speculative_generate(target, draft, TokenSeq{2}, cfg, rng);
  EXPECT_EQ(r.tokens.size(), 1u);
  EXPECT_EQ(r.trace.draft_proposed, 0u);
  EXPECT_EQ(r.trace.alpha(), 0.0);
}

TEST(Speculative, ValidatesInputs) {
  const auto target = RandomBigram(61);
  NGramLogitLM other(Vocab::make(6, 0, 1), 1);
  GenerationConfig cfg;
  Rng rng(11);
  EXPECT_THROW(speculative_generate(target, other, TokenSeq{2}, cfg, rng), ConfigError);
  EXPECT_THROW(speculative_generate(target, target, TokenSeq{9}, cfg, rng), DomainError);
  cfg.block_size = 0;
  EXPECT_THROW(speculative_generate(target, target, TokenSeq{2}, cfg, rng), DomainError);
}

TEST(Autoregressive, StopsAtEosAndBudget) {
  NGramLogitLM m(kVocab, 1);
  m.set_row(TokenSeq{2}, LogitVector(std::vector<double>{-100, 100, 0, 0, 0}));
  GenerationConfig cfg;
  cfg.max_new_tokens = 10;
  Rng rng(12);
  EXPECT_EQ(generate_autoregressive(m, TokenSeq{2}, cfg, rng), (TokenSeq{1}));
  cfg.tau_decode = Temperature(0.0);
  cfg.max_new_tokens = 4;
  // Unseen contexts have all-zero logits; greedy picks bos (id 0).
  EXPECT_EQ(generate_autoregressive(m, TokenSeq{3}, cfg, rng), (TokenSeq{0, 0, 0, 0}));
}

TEST(Residual, HandWorkedPair) {
  const auto p = ProbDist::from({0.6, 0.4});
  const auto q = ProbDist::from({0.3, 0.7});
  const auto r = residual_distribution(p, q);
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_EQ(r[1], 0.0);
  EXPECT_NEAR(acceptance_probability(p, q), 0.7, 1e-15);
  const auto ind = induced_distribution(p, q);
  EXPECT_NEAR(ind[0], 0.6, 1e-15);
  EXPECT_NEAR(ind[1], 0.4, 1e-15);

  const auto a = ProbDist::from({1.0, 0.0});
  const auto b = ProbDist::from({0.0, 1.0});
  EXPECT_EQ(ToVec(residual_distribution(a, b)), ToVec(a));
  EXPECT_EQ(acceptance_probability(a, b), 0.0);
  EXPECT_EQ(acceptance_probability(p, p), 1.0);
}

TEST(Residual, InducedEqualsTargetOverManySizes) {
  Rng rng(15);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    auto p = oracle::Softmax(RandomVec(rng, n, 3.0), 1.0);
    auto q = oracle::Softmax(RandomVec(rng, n, 3.0), 1.0);
    // Some exact zeros on either side.
    if (trial % 3 == 0) p[rng.below(n)] = 0.0;
    if (trial % 5 == 0) q[rng.below(n)] = 0.0;
    auto renorm = [](std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      for (double& x : v) x /= s;
    };
    renorm(p);
    renorm(q);
    const auto ind = induced_distribution(ProbDist::from(p), ProbDist::from(q));
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(ind[i] - p[i]));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Verify, IdenticalDistributionsAcceptAllAndDrawBonus) {
  const auto p = ProbDist::from({0.2, 0.3, 0.5});
  const std::vector<ProbDist> ps = {p, p, p, p}, qs = {p, p, p};
  const TokenSeq prop = {2, 1, 2};
  Rng rng(16);
  for (int i = 0; i < 100; ++i) {
    const auto vo = verify_block(ps, qs, prop, rng);
    EXPECT_EQ(vo.accepted_count, 3u);
    EXPECT_EQ(vo.kind, VerifyOutcome::Kind::kBonus);
  }
}

TEST(Verify, DisjointRejectsAtFirstPosition) {
  const std::vector<ProbDist> ps = {ProbDist::from({0.0, 1.0})};
  const std::vector<ProbDist> qs = {ProbDist::from({1.0, 0.0})};
  const TokenSeq prop = {0};
  Rng rng(17);
  const auto vo = verify_block(ps, qs, prop, rng);
  EXPECT_EQ(vo.accepted_count, 0u);
  EXPECT_EQ(vo.kind, VerifyOutcome::Kind::kResample);
  EXPECT_EQ(vo.correction, std::optional<TokenId>(1));
}

TEST(Verify, AcceptanceFrequencyIsOverlap) {
  const auto p = ProbDist::from({0.6, 0.4});
  const auto q = ProbDist::from({0.3, 0.7});
  const std::vector<ProbDist> ps = {p}, qs = {q};
  Rng rng(18);
  const int n = 100000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    const TokenSeq prop = {sample(q, rng)};
    accepted += static_cast<int>(verify_block(ps, qs, prop, rng).accepted_count);
  }
  EXPECT_NEAR(accepted, 0.7 * n, oracle::ThreeSigma(0.7, n));
}

TEST(Autoregressive, EosFirstGivesOnlyEos) {
  NGramLogitLM m(kVocab, 1);
  for (TokenId t = 0; t < kVocab.size; ++t) {
    m.set_row(TokenSeq{t}, LogitVector(std::vector<double>{-50, 50, -50, -50, -50}));
  }
  GenerationConfig cfg;
  Rng rng(19);
  EXPECT_EQ(generate_autoregressive(m, TokenSeq{2, 3}, cfg, rng), (TokenSeq{1}));
}

TEST(Autoregressive, GreedyIsRepeatable) {
  const auto m = RandomBigram(71, -2.0);
  GenerationConfig cfg;
  cfg.tau_decode = Temperature(0.0);
  Rng a(1), b(99);
  EXPECT_EQ(generate_autoregressive(m, TokenSeq{2}, cfg, a),
            generate_autoregressive(m, TokenSeq{2}, cfg, b));
}

TEST(Autoregressive, SingleTokenFrequenciesMatchSoftmax) {
  const auto m = RandomBigram(72, 0.3);
  GenerationConfig cfg;
  cfg.max_new_tokens = 1;
  const TokenSeq prompt = {3};
  const auto l = m.forward(prompt);
  const auto p = oracle::Softmax({l.values().begin(), l.values().end()}, 1.0);
  Rng rng(20);
  const int n = 50000;
  std::vector<int> counts(kVocab.size, 0);
  for (int i = 0; i < n; ++i) ++counts[generate_autoregressive(m, prompt, cfg, rng)[0]];
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(counts[k], n * p[k], oracle::ThreeSigma(p[k], n));
  }
}

// Unigram models over vocab 8: every position has the same target
// distribution, so pooled token frequencies must match it.
TEST(Speculative, PooledMarginalsMatchTarget) {
  const Vocab v8 = Vocab::make(8, 0, 1);
  Rng init(21);
  NGramLogitLM target(v8, 1), draft(v8, 1);
  auto tl = RandomVec(init, 8, 1.0);
  auto dl = RandomVec(init, 8, 1.0);
  tl[v8.eos_id] = dl[v8.eos_id] = -30.0;
  for (TokenId t = 0; t < 8; ++t) {
    target.set_row(TokenSeq{t}, LogitVector(tl));
    draft.set_row(TokenSeq{t}, LogitVector(dl));
  }
  for (double tau : {0.7, 1.0}) {
    const auto p = oracle::Softmax(tl, tau);
    GenerationConfig cfg;
    cfg.tau_decode = Temperature(tau);
    cfg.max_new_tokens = 50;
    Rng rng(22);
    std::vector<long> counts(8, 0);
    long n = 0;
    while (n < 200000) {
      for (TokenId t : speculative_generate(target, draft, TokenSeq{2}, cfg, rng).tokens) {
        ++counts[t];
        ++n;
      }
    }
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_NEAR(counts[k], n * p[k], oracle::ThreeSigma(p[k], n) + 1e-9)
          << "tau " << tau << " token " << k;
    }
  }
}

TEST(Speculative, GreedyMatchesAutoregressiveOnManyPrompts) {
  const Vocab v = Vocab::make(12, 0, 1);
  Rng init(23);
  NGramLogitLM target(v, 2), draft(v, 1);
  for (TokenId a = 0; a < v.size; ++a) {
    draft.set_row(TokenSeq{a}, LogitVector(RandomVec(init, v.size, 1.0)));
    for (TokenId b = 0; b < v.size; ++b) {
      target.set_row(TokenSeq{a, b}, LogitVector(RandomVec(init, v.size, 1.0)));
    }
  }
  GenerationConfig cfg;
  cfg.tau_decode = Temperature(0.0);
  cfg.max_new_tokens = 32;
  for (int i = 0; i < 100; ++i) {
    TokenSeq prompt(1 + init.below(6));
    for (auto& t : prompt) t = static_cast<TokenId>(2 + init.below(v.size - 2));
    Rng a(i), b(i + 1000);
    EXPECT_EQ(speculative_generate(target, draft, prompt, cfg, a).tokens,
              generate_autoregressive(target, prompt, cfg, b));
  }
}

TEST(Speculative, PerPositionAcceptanceMatchesOverlap) {
  // Unigram pair: every verified position has the same (p, q), so the
  // first-position acceptance rate over rounds estimates Σ min(p, q).
  const Vocab v8 = Vocab::make(8, 0, 1);
  Rng init(24);
  auto tl = RandomVec(init, 8, 1.0);
  auto dl = RandomVec(init, 8, 1.0);
  tl[1] = dl[1] = -30.0;
  NGramLogitLM target(v8, 1), draft(v8, 1);
  for (TokenId t = 0; t < 8; ++t) {
    target.set_row(TokenSeq{t}, LogitVector(tl));
    draft.set_row(TokenSeq{t}, LogitVector(dl));
  }
  const double beta = oracle::Overlap(oracle::Softmax(tl, 1.0), oracle::Softmax(dl, 1.0));
  GenerationConfig cfg;
  cfg.max_new_tokens = 64;
  Rng rng(25);
  long rounds = 0, first_accepted = 0;
  while (rounds < 50000) {
    const auto r = speculative_generate(target, draft, TokenSeq{2}, cfg, rng);
    for (const auto& round : r.trace.rounds) {
      if (round.proposed.empty()) continue;
      ++rounds;
      first_accepted += round.accepted_count > 0 ? 1 : 0;
    }
    EXPECT_LE(r.trace.draft_accepted, r.trace.draft_proposed);
  }
  EXPECT_NEAR(first_accepted, rounds * beta, oracle::ThreeSigma(beta, rounds));
}

TEST(Speculative, AlphaNonDecreasingAlongInterpolation) {
  const auto target = RandomBigram(81, -3.0);
  const auto start = RandomBigram(82, -3.0);
  std::vector<double> alphas;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto draft = interpolate(start, target, t);
    std::size_t proposed = 0, accepted = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      GenerationConfig cfg;
      cfg.max_new_tokens = 64;
      Rng rng(seed);
      for (int i = 0; i < 200; ++i) {
        const auto r = speculative_generate(target, *draft, TokenSeq{2}, cfg, rng);
        proposed += r.trace.draft_proposed;
        accepted += r.trace.draft_accepted;
      }
    }
    alphas.push_back(static_cast<double>(accepted) / static_cast<double>(proposed));
  }
  for (std::size_t i = 1; i < alphas.size(); ++i) EXPECT_GE(alphas[i], alphas[i - 1]);
  EXPECT_EQ(alphas.back(), 1.0);
}

}  // namespace
}  // namespace sdlab
