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
#include "sdlab/distill/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sdlab/errors.hpp"

namespace sdlab {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::kTeacher: return "teacher";
    case Source::kStudent: return "student";
    case Source::kFixed: return "fixed";
  }
  return "?";
}

Source parse_source(std::string_view s) {
  if (s == "teacher") return Source::kTeacher;
  if (s == "student") return Source::kStudent;
  if (s == "fixed") return Source::kFixed;
  throw ParseError("unknown data source '" + std::string(s) + "'");
}

void Dataset::validate(const Vocab& vocab) const {
  for (const auto& p : pairs) {
    vocab.check(p.prompt);
    vocab.check(p.response);
    if (p.response.empty()) throw DomainError("dataset pair with empty response");
  }
}

std::string join_ids(std::span<const TokenId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

TokenSeq parse_ids(std::string_view text) {
  TokenSeq out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(pos, end - pos);
    TokenId v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
      throw ParseError("bad token id '" + std::string(tok) + "'");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

void write_dataset(const Dataset& data, std::ostream& out) {
  char tau[32];
  for (const auto& p : data.pairs) {
    std::snprintf(tau, sizeof(tau), "%.6f", p.tau_gen.value());
    out << "tau=" << tau << " src=" << to_string(p.source)
        << " prompt=" << join_ids(p.prompt)
        << " response=" << join_ids(p.response) << '\n';
  }
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_dataset(data, out);
}

Dataset read_dataset(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    DataPair pair;
    int seen = 0;
    while (fields >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) {
        throw ParseError("dataset line " + std::to_string(lineno) +
                         ": expected key=value, got '" + field + "'");
      }
      const std::string key = field.substr(0, eq);
      const std::string_view value = std::string_view(field).substr(eq + 1);
      if (key == "tau") {
        pair.tau_gen = Temperature(std::stod(std::string(value)));
        seen |= 1;
      } else if (key == "src") {
        pair.source = parse_source(value);
        seen |= 2;
      } else if (key == "prompt") {
        pair.prompt = parse_ids(value);
        seen |= 4;
      } else if (key == "response") {
        pair.response = parse_ids(value);
        seen |= 8;
      } else {
        throw ParseError("dataset line " + std::to_string(lineno) +
                         ": unknown field '" + key + "'");
      }
    }
    if (seen != 15) {
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": missing field");
    }
    data.pairs.push_back(std::move(pair));
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_prompts(std::span<const TokenSeq> prompts, std::ostream& out) {
  for (const auto& p : prompts) out << join_ids(p) << '\n';
}

void write_prompts(std::span<const TokenSeq> prompts,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_prompts(prompts, out);
}

std::vector<TokenSeq> read_prompts(std::istream& in) {
  std::vector<TokenSeq> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(parse_ids(line));
  }
  return out;
}

std::vector<TokenSeq> read_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open prompt file " + path.string());
  return read_prompts(in);
}

}  // namespace sdlab
