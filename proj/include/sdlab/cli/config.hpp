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

// Run configuration. Flat "section.key = value" lines; '#' starts a
// comment. Unknown or repeated keys are rejected with the key named.
//
//   corpus.concentration = 1.0
//   sweep.kd_taus = 0.0,0.1,0.2

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdlab/corpus/corpus.hpp"
#include "sdlab/distill/distill.hpp"
#include "sdlab/specdec/specdec.hpp"

namespace sdlab {

enum class DomainId { kIn, kOut };
std::string_view to_string(DomainId d);

struct ModelsConfig {
  TeacherSpec teacher;
  std::size_t teacher_steps = 200000;
  ModelFamily draft_family = ModelFamily::kNGram;
  std::size_t draft_order = 1;
  NeuralShape draft_shape;
  std::uint64_t draft_init_seed = 0;
};

struct DecodeSection {
  GenerationConfig gen;
  std::size_t runs = 5;
  DomainId domain = DomainId::kIn;
};

struct SweepSection {
  std::vector<double> kd_taus;
  std::vector<double> decode_taus;
  std::vector<std::uint64_t> seeds;
  DomainId domain = DomainId::kIn;
  bool dump_traces = false;
};

struct ComposeSection {
  std::vector<double> tau_set = {1.0, 0.9, 0.8};
  double single_tau = 1.0;
  std::vector<double> decode_taus = {1.0};
};

struct RunConfig {
  CorpusSpec corpus;
  std::size_t n_eval_prompts = 50;
  double out_concentration = 0.05;
  ModelsConfig models;
  KDConfig kd;
  DomainId kd_domain = DomainId::kIn;
  DecodeSection decode;
  SweepSection sweep;
  ComposeSection compose;
  std::filesystem::path output_dir = "out";

  CorpusBuildOptions build_options() const;
};

// Throws ParseError naming the line and key on any problem.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

// Command-line overrides. seed replaces corpus.seed, kd.seed and
// decode.seed, and renumbers sweep.seeds to seed, seed+1, ...
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool timing = true;
};
void apply_overrides(RunConfig& config, const Overrides& overrides);

}  // namespace sdlab
