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

// Versioned binary checkpoint container, little-endian:
//
//   "SDLABCKP" u32 version u32 family u64 vocab u32 bos u32 eos
//   ngram:  u64 order u64 rows { u64 key, vocab x f64 }*   (keys ascending)
//   neural: u64 context u64 embed u64 hidden
//           5 x { u64 count, count x f64 }  (embedding, hidden_w, hidden_b,
//                                            output_w, output_b)
//
// Doubles are stored as their IEEE-754 bit patterns, so save -> load is
// bit-exact and reruns produce byte-identical files.

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "sdlab/lm/language_model.hpp"

namespace sdlab {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const LanguageModel& model, std::ostream& out);
void save_checkpoint(const LanguageModel& model,
                     const std::filesystem::path& path);

// Throws ParseError on bad magic, unknown version/family or truncation.
std::unique_ptr<LanguageModel> load_checkpoint(std::istream& in);
std::unique_ptr<LanguageModel> load_checkpoint(
    const std::filesystem::path& path);

}  // namespace sdlab
