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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "sdlab/lm/types.hpp"
#include "sdlab/sampling/sampling.hpp"

namespace sdlab {

enum class Source { kTeacher, kStudent, kFixed };
std::string_view to_string(Source s);
Source parse_source(std::string_view s);

struct DataPair {
  TokenSeq prompt;
  TokenSeq response;  // non-empty
  Source source = Source::kFixed;
  Temperature tau_gen{1.0};
};

struct Dataset {
  std::vector<DataPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  // Throws DomainError on out-of-vocab tokens or empty responses.
  void validate(const Vocab& vocab) const;
};

// One pair per line:
// tau=<float> src=<teacher|student|fixed> prompt=<ids,comma> response=<ids,comma>
void write_dataset(const Dataset& data, std::ostream& out);
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

// Prompt files: one prompt per line, comma-separated ids.
void write_prompts(std::span<const TokenSeq> prompts, std::ostream& out);
void write_prompts(std::span<const TokenSeq> prompts,
                   const std::filesystem::path& path);
std::vector<TokenSeq> read_prompts(std::istream& in);
std::vector<TokenSeq> read_prompts(const std::filesystem::path& path);

// "3,5,7" <-> {3,5,7}; empty string is the empty sequence.
std::string join_ids(std::span<const TokenId> ids);
TokenSeq parse_ids(std::string_view text);

}  // namespace sdlab
