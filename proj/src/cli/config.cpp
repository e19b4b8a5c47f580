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
#include "sdlab/cli/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "sdlab/errors.hpp"

namespace sdlab {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Ctx {
  std::string key;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("config line " + std::to_string(line) + ": key '" + key +
                     "': " + what);
  }
};

double ParseDouble(const std::string& v, const Ctx& c) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
    c.fail("expected a number, got '" + v + "'");
  }
  return x;
}

std::uint64_t ParseU64(const std::string& v, const Ctx& c) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || *end != '\0' || errno == ERANGE) {
    c.fail("expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::uint64_t>(x);
}

bool ParseBool(const std::string& v, const Ctx& c) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  c.fail("expected true or false, got '" + v + "'");
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  return out;
}

std::vector<double> ParseDoubles(const std::string& v, const Ctx& c) {
  std::vector<double> out;
  for (const auto& s : SplitList(v)) out.push_back(ParseDouble(s, c));
  if (out.empty()) c.fail("expected a non-empty list");
  return out;
}

std::vector<std::uint64_t> ParseU64s(const std::string& v, const Ctx& c) {
  std::vector<std::uint64_t> out;
  for (const auto& s : SplitList(v)) out.push_back(ParseU64(s, c));
  if (out.empty()) c.fail("expected a non-empty list");
  return out;
}

DomainId ParseDomain(const std::string& v, const Ctx& c) {
  if (v == "in") return DomainId::kIn;
  if (v == "out") return DomainId::kOut;
  c.fail("expected in or out, got '" + v + "'");
}

Temperature ParseTau(const std::string& v, const Ctx& c) {
  const double x = ParseDouble(v, c);
  if (x < 0.0) c.fail("temperature must be >= 0");
  return Temperature(x);
}

template <typename F>
auto Wrap(const Ctx& c, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const Ctx&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    // corpus
    m["corpus.vocab_size"] = [](RunConfig& r, const std::string& v,
                                const Ctx& c) {
      r.corpus.vocab_size = ParseU64(v, c);
    };
    m["corpus.bos_id"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.corpus.bos_id = static_cast<TokenId>(ParseU64(v, c));
    };
    m["corpus.eos_id"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.corpus.eos_id = static_cast<TokenId>(ParseU64(v, c));
    };
    m["corpus.order"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.corpus.order = ParseU64(v, c);
    };
    m["corpus.concentration"] = [](RunConfig& r, const std::string& v,
                                   const Ctx& c) {
      r.corpus.concentration = ParseDouble(v, c);
    };
    m["corpus.context_weight"] = [](RunConfig& r, const std::string& v,
                                    const Ctx& c) {
      r.corpus.context_weight = ParseDouble(v, c);
    };
    m["corpus.eos_prob"] = [](RunConfig& r, const std::string& v,
                              const Ctx& c) {
      r.corpus.eos_prob = ParseDouble(v, c);
    };
    m["corpus.n_prompts"] = [](RunConfig& r, const std::string& v,
                               const Ctx& c) {
      r.corpus.n_prompts = ParseU64(v, c);
    };
    m["corpus.prompt_len"] = [](RunConfig& r, const std::string& v,
                                const Ctx& c) {
      r.corpus.prompt_len = ParseU64(v, c);
    };
    m["corpus.seed"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.corpus.seed = ParseU64(v, c);
    };
    m["corpus.n_eval_prompts"] = [](RunConfig& r, const std::string& v,
                                    const Ctx& c) {
      r.n_eval_prompts = ParseU64(v, c);
    };
    m["corpus.out_concentration"] = [](RunConfig& r, const std::string& v,
                                       const Ctx& c) {
      r.out_concentration = ParseDouble(v, c);
    };
    // models
    m["models.teacher_family"] = [](RunConfig& r, const std::string& v,
                                    const Ctx& c) {
      r.models.teacher.family = Wrap(c, [&] { return parse_family(v); });
    };
    m["models.teacher_order"] = [](RunConfig& r, const std::string& v,
                                   const Ctx& c) {
      r.models.teacher.order = ParseU64(v, c);
    };
    m["models.teacher_context"] = [](RunConfig& r, const std::string& v,
                                     const Ctx& c) {
      r.models.teacher.shape.context = ParseU64(v, c);
    };
    m["models.teacher_embed"] = [](RunConfig& r, const std::string& v,
                                   const Ctx& c) {
      r.models.teacher.shape.embed = ParseU64(v, c);
    };
    m["models.teacher_hidden"] = [](RunConfig& r, const std::string& v,
                                    const Ctx& c) {
      r.models.teacher.shape.hidden = ParseU64(v, c);
    };
    m["models.teacher_steps"] = [](RunConfig& r, const std::string& v,
                                   const Ctx& c) {
      r.models.teacher_steps = ParseU64(v, c);
    };
    m["models.teacher_learning_rate"] = [](RunConfig& r, const std::string& v,
                                           const Ctx& c) {
      r.models.teacher.learning_rate = ParseDouble(v, c);
    };
    m["models.teacher_tolerance"] = [](RunConfig& r, const std::string& v,
                                       const Ctx& c) {
      r.models.teacher.tolerance = ParseDouble(v, c);
    };
    m["models.teacher_eval_every"] = [](RunConfig& r, const std::string& v,
                                        const Ctx& c) {
      r.models.teacher.eval_every = ParseU64(v, c);
    };
    m["models.teacher_heldout_sequences"] = [](RunConfig& r,
                                               const std::string& v,
                                               const Ctx& c) {
      r.models.teacher.heldout_sequences = ParseU64(v, c);
    };
    m["models.draft_family"] = [](RunConfig& r, const std::string& v,
                                  const Ctx& c) {
      r.models.draft_family = Wrap(c, [&] { return parse_family(v); });
    };
    m["models.draft_order"] = [](RunConfig& r, const std::string& v,
                                 const Ctx& c) {
      r.models.draft_order = ParseU64(v, c);
    };
    m["models.draft_context"] = [](RunConfig& r, const std::string& v,
                                   const Ctx& c) {
      r.models.draft_shape.context = ParseU64(v, c);
    };
    m["models.draft_embed"] = [](RunConfig& r, const std::string& v,
                                 const Ctx& c) {
      r.models.draft_shape.embed = ParseU64(v, c);
    };
    m["models.draft_hidden"] = [](RunConfig& r, const std::string& v,
                                  const Ctx& c) {
      r.models.draft_shape.hidden = ParseU64(v, c);
    };
    m["models.draft_init_seed"] = [](RunConfig& r, const std::string& v,
                                     const Ctx& c) {
      r.models.draft_init_seed = ParseU64(v, c);
    };
    // kd
    m["kd.mode"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.kd.mode = Wrap(c, [&] { return parse_kd_mode(v); });
    };
    m["kd.tau_gen"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.kd.tau_gen = ParseTau(v, c);
    };
    m["kd.lambda"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.kd.lambda = ParseDouble(v, c);
    };
    m["kd.loss_ratio"] = [](RunConfig& r, const std::string& v,
                            const Ctx& c) {
      r.kd.loss_ratio = ParseDouble(v, c);
    };
    m["kd.learning_rate"] = [](RunConfig& r, const std::string& v,
                               const Ctx& c) {
      r.kd.learning_rate = ParseDouble(v, c);
    };
    m["kd.steps"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.kd.steps = ParseU64(v, c);
    };
    m["kd.seed"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.kd.seed = ParseU64(v, c);
    };
    m["kd.max_new_tokens"] = [](RunConfig& r, const std::string& v,
                                const Ctx& c) {
      r.kd.max_new_tokens = ParseU64(v, c);
    };
    m["kd.domain"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.kd_domain = ParseDomain(v, c);
    };
    // decode
    m["decode.tau"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.decode.gen.tau_decode = ParseTau(v, c);
    };
    m["decode.block_size"] = [](RunConfig& r, const std::string& v,
                                const Ctx& c) {
      r.decode.gen.block_size = ParseU64(v, c);
    };
    m["decode.max_new_tokens"] = [](RunConfig& r, const std::string& v,
                                    const Ctx& c) {
      r.decode.gen.max_new_tokens = ParseU64(v, c);
    };
    m["decode.seed"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.decode.gen.seed = ParseU64(v, c);
    };
    m["decode.runs"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.decode.runs = ParseU64(v, c);
    };
    m["decode.domain"] = [](RunConfig& r, const std::string& v,
                            const Ctx& c) {
      r.decode.domain = ParseDomain(v, c);
    };
    // sweep
    m["sweep.kd_taus"] = [](RunConfig& r, const std::string& v,
                            const Ctx& c) {
      r.sweep.kd_taus = ParseDoubles(v, c);
    };
    m["sweep.decode_taus"] = [](RunConfig& r, const std::string& v,
                                const Ctx& c) {
      r.sweep.decode_taus = ParseDoubles(v, c);
    };
    m["sweep.seeds"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.sweep.seeds = ParseU64s(v, c);
    };
    m["sweep.domain"] = [](RunConfig& r, const std::string& v, const Ctx& c) {
      r.sweep.domain = ParseDomain(v, c);
    };
    m["sweep.dump_traces"] = [](RunConfig& r, const std::string& v,
                                const Ctx& c) {
      r.sweep.dump_traces = ParseBool(v, c);
    };
    // compose
    m["compose.tau_set"] = [](RunConfig& r, const std::string& v,
                              const Ctx& c) {
      r.compose.tau_set = ParseDoubles(v, c);
    };
    m["compose.single_tau"] = [](RunConfig& r, const std::string& v,
                                 const Ctx& c) {
      r.compose.single_tau = ParseDouble(v, c);
    };
    m["compose.decode_taus"] = [](RunConfig& r, const std::string& v,
                                  const Ctx& c) {
      r.compose.decode_taus = ParseDoubles(v, c);
    };
    // io
    m["io.output_dir"] = [](RunConfig& r, const std::string& v,
                            const Ctx& c) {
      if (v.empty()) c.fail("expected a path");
      r.output_dir = v;
    };
    return m;
  }();
  return table;
}

}  // namespace

std::string_view to_string(DomainId d) {
  return d == DomainId::kIn ? "in" : "out";
}

CorpusBuildOptions RunConfig::build_options() const {
  CorpusBuildOptions o;
  o.teacher = models.teacher;
  o.teacher_steps = models.teacher_steps;
  o.n_eval_prompts = n_eval_prompts;
  o.out_concentration = out_concentration;
  return o;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.sweep.kd_taus = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                       0.6, 0.7, 0.8, 0.9, 1.0};
  cfg.sweep.decode_taus = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  cfg.sweep.seeds = {0, 1, 2, 3, 4};

  std::set<std::string> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = Trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected 'section.key = value'");
    }
    Ctx c{Trim(line.substr(0, eq)), lineno};
    const std::string value = Trim(line.substr(eq + 1));
    const auto& setters = Setters();
    auto it = setters.find(c.key);
    if (it == setters.end()) c.fail("unknown key");
    if (!seen.insert(c.key).second) c.fail("repeated key");
    try {
      it->second(cfg, value, c);
    } catch (const ParseError& e) {
      // Library parsers (mode, family names) do not know the key.
      if (std::string_view(e.what()).starts_with("config line")) throw;
      c.fail(e.what());
    } catch (const DomainError& e) {
      c.fail(e.what());
    }
  }
  try {
    cfg.corpus.validate();
    cfg.kd.validate();
    cfg.decode.gen.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (cfg.decode.runs < 1) throw ParseError("config: decode.runs must be >= 1");
  if (cfg.out_concentration <= 0.0) {
    throw ParseError("config: corpus.out_concentration must be > 0");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  return parse_config(in);
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (overrides.seed) {
    const std::uint64_t s = *overrides.seed;
    config.corpus.seed = s;
    config.kd.seed = s;
    config.decode.gen.seed = s;
    for (std::size_t i = 0; i < config.sweep.seeds.size(); ++i) {
      config.sweep.seeds[i] = s + i;
    }
  }
}

}  // namespace sdlab
