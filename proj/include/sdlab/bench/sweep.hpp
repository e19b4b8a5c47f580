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

// KD-temperature x decoding-temperature sweeps. One draft is trained per
// (seed, KD temperature) from a shared student initialization, saved as a
// checkpoint, and evaluated on every decoding temperature.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sdlab/bench/decode.hpp"
#include "sdlab/distill/distill.hpp"

namespace sdlab {

struct DistillSetup {
  const LanguageModel* teacher = nullptr;
  const LanguageModel* student_init = nullptr;
  std::span<const TokenSeq> train_prompts;
  std::span<const TokenSeq> eval_prompts;
};

// kd.tau_gen and kd.tau_set are overwritten from tau_set: a single
// temperature is plain SeqKD data, several are dealt round-robin.
struct DraftRecipe {
  KDConfig kd;
  std::vector<Temperature> tau_set;
};

// Trains one draft. The teacher data, the pair order and the online coin
// flips derive from seed alone: recipes that differ only in temperature
// see common random numbers, and a one-element composition trains exactly
// the same draft as the plain recipe.
std::unique_ptr<LanguageModel> train_draft(const DistillSetup& setup,
                                           const DraftRecipe& recipe,
                                           std::uint64_t seed,
                                           TrainingLog* log = nullptr,
                                           Dataset* data = nullptr);

// Seed of the decode runs for one sweep cell.
std::uint64_t cell_seed(std::uint64_t seed, Temperature kd_tau,
                        Temperature decode_tau);

// Stable content hash of everything that determines a trained draft.
std::uint64_t recipe_hash(const DistillSetup& setup, const DraftRecipe& recipe,
                          std::uint64_t seed);

// Loads <cache_dir>/draft-<hash>.ckpt when present, otherwise trains and
// saves it. An empty cache_dir disables caching.
std::unique_ptr<LanguageModel> cached_draft(
    const DistillSetup& setup, const DraftRecipe& recipe, std::uint64_t seed,
    const std::filesystem::path& cache_dir);

struct SweepConfig {
  std::vector<double> kd_taus;
  std::vector<double> decode_taus;
  std::vector<std::uint64_t> seeds;
  KDConfig kd;
  GenerationConfig decode;
  std::size_t runs = kDefaultRuns;
  std::size_t jobs = 1;
  bool timing = true;
  bool keep_traces = false;
  std::filesystem::path cache_dir;
  std::string corpus_id;
};

struct SweepCell {
  double kd_tau = 0.0;
  double decode_tau = 0.0;
  std::uint64_t seed = 0;
  DecodeStats stats;
};

struct SweepResult {
  std::vector<double> kd_taus;      // ascending
  std::vector<double> decode_taus;  // ascending
  std::vector<std::uint64_t> seeds;
  std::size_t block_size = kDefaultBlockSize;
  std::string corpus_id;
  KDMode kd_mode = KDMode::kOffline;
  // kd-major, then decode, then seed
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t kd, std::size_t dec, std::size_t seed) const;
  double mean_alpha(std::size_t kd, std::size_t dec) const;
};

// Throws TrainingError naming the cell coordinates when a draft fails to
// train, DomainError on empty axes.
SweepResult run_sweep(const DistillSetup& setup, const SweepConfig& config);

// kd_tau,decode_tau,seed,alpha,speedup,tokens_out,wall_spec_s,wall_base_s
struct SweepRow {
  double kd_tau = 0.0;
  double decode_tau = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double speedup = 0.0;
  std::size_t tokens_out = 0;
  double wall_spec_s = 0.0;
  double wall_base_s = 0.0;
};

std::vector<SweepRow> sweep_rows(const SweepResult& result);
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);
// Throws ParseError on a bad header or malformed row.
std::vector<SweepRow> read_sweep_csv(std::istream& in);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

// One file per cell, kd<kd>_dec<dec>_seed<s>.trace, holding a
// "# run=<r> prompt=<i>" line before each trace.
void write_sweep_traces(const SweepResult& result,
                        const std::filesystem::path& dir);
std::string trace_file_name(double kd_tau, double decode_tau,
                            std::uint64_t seed);

}  // namespace sdlab
