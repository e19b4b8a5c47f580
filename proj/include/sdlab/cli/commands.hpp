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

// The sdlab subcommands. Every artifact lands under io.output_dir:
//
//   corpus/   gt_{in,out}.ckpt teacher_{in,out}.ckpt prompts_*.txt eval_*.txt
//             heldout_*.txt corpus_log.txt
//   distill/  student_init.ckpt draft.ckpt dataset.txt train_log.csv
//   decode/   stats.txt traces.txt generations.txt lengths.txt
//   sweep/    sweep.csv traces/
//   compose/  composition.md composition.csv
//   cache/    trained drafts keyed by recipe hash
//
// Errors propagate as exceptions; the tool maps them to exit codes.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sdlab/cli/config.hpp"

namespace sdlab {

struct Layout {
  std::filesystem::path root;
  std::filesystem::path corpus() const { return root / "corpus"; }
  std::filesystem::path distill() const { return root / "distill"; }
  std::filesystem::path decode() const { return root / "decode"; }
  std::filesystem::path sweep() const { return root / "sweep"; }
  std::filesystem::path compose() const { return root / "compose"; }
  std::filesystem::path cache() const { return root / "cache"; }
  std::filesystem::path teacher(DomainId d) const;
  std::filesystem::path ground_truth(DomainId d) const;
  std::filesystem::path prompts(DomainId d) const;
  std::filesystem::path eval_prompts(DomainId d) const;
  std::filesystem::path heldout(DomainId d) const;
};

struct LoadedDomain {
  std::unique_ptr<LanguageModel> teacher;
  std::vector<TokenSeq> train_prompts;
  std::vector<TokenSeq> eval_prompts;
};

// Throws ConfigError when the corpus artifacts are missing.
LoadedDomain load_domain(const Layout& layout, DomainId domain);

// Zero n-gram table, or a seeded TinyNeuralLM.
std::unique_ptr<LanguageModel> make_student_init(const RunConfig& config);

void cmd_corpus(const RunConfig& config, const Overrides& o, std::ostream& log);
void cmd_distill(const RunConfig& config, const Overrides& o,
                 std::ostream& log);
void cmd_decode(const RunConfig& config, const Overrides& o, std::ostream& log);
void cmd_sweep(const RunConfig& config, const Overrides& o, std::ostream& log);
void cmd_compose(const RunConfig& config, const Overrides& o,
                 std::ostream& log);
// Throws UsageError on an empty path list.
std::string cmd_report(std::span<const std::filesystem::path> csv_paths);

}  // namespace sdlab
