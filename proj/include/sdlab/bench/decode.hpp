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

// Decoding metrics: acceptance rate, wall-clock speedup over plain
// autoregressive sampling, composition deltas and output-length histograms.

#include <cstdint>
#include <span>
#include <vector>

#include "sdlab/specdec/specdec.hpp"

namespace sdlab {

inline constexpr std::size_t kDefaultRuns = 5;

struct DecodeOptions {
  std::size_t runs = kDefaultRuns;
  // Off: the baseline is not run, wall times and speedup are reported as 0.
  bool timing = true;
  bool keep_traces = false;       // one trace per (run, prompt), run-major
  bool keep_generations = false;  // speculative outputs, same order
};

struct DecodeStats {
  Temperature decode_tau;
  double alpha = 0.0;    // draft_accepted / draft_proposed over all runs
  double speedup = 0.0;  // mean base time / mean speculative time
  std::size_t tokens_out = 0;
  double wall_time_spec = 0.0;  // seconds per run, averaged
  double wall_time_base = 0.0;
  std::size_t runs = 0;
  std::size_t draft_proposed = 0;
  std::size_t draft_accepted = 0;
  std::uint64_t prompt_digest = 0;  // prompts, seed and runs

  std::vector<SpeculationTrace> traces;
  std::vector<TokenSeq> generations;
};

// Run r on prompt i uses Rng(derive(config.seed, {r, i})) for both the
// speculative and the baseline decode. Throws DomainError on an empty
// prompt list or runs == 0.
DecodeStats measure_decode(const LanguageModel& target,
                           const LanguageModel& draft,
                           std::span<const TokenSeq> prompts,
                           const GenerationConfig& config,
                           const DecodeOptions& options = {});

std::uint64_t prompt_digest(std::span<const TokenSeq> prompts,
                            std::uint64_t seed, std::size_t runs);

struct CompositionRow {
  double decode_tau = 0.0;
  double alpha_single = 0.0;
  double alpha_composed = 0.0;
  double delta_alpha = 0.0;
  double speedup_single = 0.0;
  double speedup_composed = 0.0;
  double delta_speedup = 0.0;
};

// Pairs entries by position. Throws DomainError when the lists differ in
// length, decode temperature or prompt digest.
std::vector<CompositionRow> compare_composition(
    std::span<const DecodeStats> single, std::span<const DecodeStats> composed);

struct LengthBucket {
  std::size_t lo = 0;  // inclusive
  std::size_t hi = 0;  // inclusive
  std::size_t count = 0;
};

struct LengthHistogram {
  std::vector<LengthBucket> buckets;
  std::size_t total() const;
};

// Buckets [0, w-1], [w, 2w-1], ... below max_len, then one bucket holding
// exactly max_len (and anything longer).
LengthHistogram token_length_stats(std::span<const TokenSeq> generations,
                                   std::size_t max_len,
                                   std::size_t bucket_width = 8);

// Spearman rank correlation with average ranks for ties. 0 when either
// side is constant or fewer than two points are given.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sdlab
