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
#include "sdlab/bench/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sdlab/errors.hpp"

namespace sdlab {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void Mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
}

std::vector<double> Ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::uint64_t prompt_digest(std::span<const TokenSeq> prompts,
                            std::uint64_t seed, std::size_t runs) {
  std::uint64_t h = kFnvOffset;
  Mix(h, seed);
  Mix(h, runs);
  Mix(h, prompts.size());
  for (const auto& p : prompts) {
    Mix(h, p.size());
    for (TokenId t : p) Mix(h, t);
  }
  return h;
}

DecodeStats measure_decode(const LanguageModel& target,
                           const LanguageModel& draft,
                           std::span<const TokenSeq> prompts,
                           const GenerationConfig& config,
                           const DecodeOptions& options) {
  if (prompts.empty()) throw DomainError("measure_decode: empty prompt list");
  if (options.runs < 1) throw DomainError("measure_decode: runs must be >= 1");
  config.validate();

  using Clock = std::chrono::steady_clock;
  DecodeStats stats;
  stats.decode_tau = config.tau_decode;
  stats.runs = options.runs;
  stats.prompt_digest = prompt_digest(prompts, config.seed, options.runs);

  Clock::duration spec_time{}, base_time{};
  for (std::size_t r = 0; r < options.runs; ++r) {
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      Rng rng(Rng::derive(config.seed, {r, i}));
      SpeculativeResult res =
          speculative_generate(target, draft, prompts[i], config, rng);
      stats.draft_proposed += res.trace.draft_proposed;
      stats.draft_accepted += res.trace.draft_accepted;
      stats.tokens_out += res.tokens.size();
      if (options.keep_traces) stats.traces.push_back(std::move(res.trace));
      if (options.keep_generations) {
        stats.generations.push_back(std::move(res.tokens));
      }
    }
    spec_time += Clock::now() - t0;

    if (options.timing) {
      const auto t1 = Clock::now();
      for (std::size_t i = 0; i < prompts.size(); ++i) {
        Rng rng(Rng::derive(config.seed, {r, i}));
        (void)generate_autoregressive(target, prompts[i], config, rng);
      }
      base_time += Clock::now() - t1;
    }
  }

  stats.alpha = stats.draft_proposed == 0
                    ? 0.0
                    : static_cast<double>(stats.draft_accepted) /
                          static_cast<double>(stats.draft_proposed);
  if (options.timing) {
    const double n = static_cast<double>(options.runs);
    stats.wall_time_spec =
        std::chrono::duration<double>(spec_time).count() / n;
    stats.wall_time_base =
        std::chrono::duration<double>(base_time).count() / n;
    // clock granularity floor keeps the ratio finite and positive
    const double spec = std::max(stats.wall_time_spec, 1e-9);
    const double base = std::max(stats.wall_time_base, 1e-9);
    stats.speedup = base / spec;
  }
  return stats;
}

std::vector<CompositionRow> compare_composition(
    std::span<const DecodeStats> single,
    std::span<const DecodeStats> composed) {
  if (single.size() != composed.size()) {
    throw DomainError("composition comparison: list lengths differ");
  }
  std::vector<CompositionRow> rows;
  for (std::size_t i = 0; i < single.size(); ++i) {
    const DecodeStats& a = single[i];
    const DecodeStats& b = composed[i];
    if (a.prompt_digest != b.prompt_digest) {
      throw DomainError("composition comparison: prompt sets differ");
    }
    if (!(a.decode_tau == b.decode_tau)) {
      throw DomainError("composition comparison: decode temperatures differ");
    }
    CompositionRow row;
    row.decode_tau = a.decode_tau.value();
    row.alpha_single = a.alpha;
    row.alpha_composed = b.alpha;
    row.delta_alpha = b.alpha - a.alpha;
    row.speedup_single = a.speedup;
    row.speedup_composed = b.speedup;
    row.delta_speedup = b.speedup - a.speedup;
    rows.push_back(row);
  }
  return rows;
}

std::size_t LengthHistogram::total() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.count;
  return n;
}

LengthHistogram token_length_stats(std::span<const TokenSeq> generations,
                                   std::size_t max_len,
                                   std::size_t bucket_width) {
  if (bucket_width < 1) throw DomainError("bucket width must be >= 1");
  LengthHistogram h;
  for (std::size_t lo = 0; lo < max_len; lo += bucket_width) {
    h.buckets.push_back({lo, std::min(lo + bucket_width, max_len) - 1, 0});
  }
  h.buckets.push_back({max_len, max_len, 0});
  for (const auto& g : generations) {
    const std::size_t n = g.size();
    if (n >= max_len) {
      ++h.buckets.back().count;
      h.buckets.back().hi = std::max(h.buckets.back().hi, n);
    } else {
      ++h.buckets[n / bucket_width].count;
    }
  }
  return h;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("spearman: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const auto rx = Ranks(x);
  const auto ry = Ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace sdlab
