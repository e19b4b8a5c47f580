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
#include "sdlab/bench/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "sdlab/errors.hpp"
#include "sdlab/lm/checkpoint.hpp"

namespace sdlab {
namespace {

// Stream tags for Rng::derive, kept apart from the corpus streams.
constexpr std::uint64_t kTagData = 10;
constexpr std::uint64_t kTagOrder = 11;
constexpr std::uint64_t kTagOnline = 12;
constexpr std::uint64_t kTagDecode = 20;

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

class Fnv {
 public:
  void bytes(std::string_view s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= kFnvPrime;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= kFnvPrime;
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = kFnvOffset;
};

// Temperatures are identified by their value in thousandths so that
// streams do not depend on grid position.
std::uint64_t Milli(double tau) {
  return static_cast<std::uint64_t>(std::llround(tau * 1000.0));
}

void HashModel(Fnv& h, const LanguageModel& m) {
  std::ostringstream os;
  save_checkpoint(m, os);
  h.bytes(os.str());
}

std::vector<double> SortedUnique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string Format(const char* fmt, double a, double b, std::uint64_t c) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a, b,
                static_cast<unsigned long long>(c));
  return buf;
}

}  // namespace

std::unique_ptr<LanguageModel> train_draft(const DistillSetup& setup,
                                           const DraftRecipe& recipe,
                                           std::uint64_t seed,
                                           TrainingLog* log, Dataset* data) {
  if (!setup.teacher || !setup.student_init) {
    throw ConfigError("distillation needs a teacher and a student");
  }
  if (recipe.tau_set.empty()) throw DomainError("recipe needs a temperature");
  KDConfig kd = recipe.kd;
  kd.tau_gen = recipe.tau_set.front();
  kd.tau_set.clear();
  if (recipe.tau_set.size() > 1) kd.tau_set = recipe.tau_set;
  kd.seed = Rng::derive(seed, {kTagOrder});

  // Every temperature reuses the same streams, so responses for one prompt
  // at different temperatures come from the same uniforms.
  Rng data_rng(Rng::derive(seed, {kTagData}));
  Dataset generated =
      recipe.tau_set.size() == 1
          ? seqkd_generate(*setup.teacher, setup.train_prompts, kd.tau_gen,
                           data_rng, kd.max_new_tokens)
          : compose_dataset(*setup.teacher, Source::kTeacher, recipe.tau_set,
                            setup.train_prompts, data_rng, kd.max_new_tokens);

  auto student = setup.student_init->clone();
  TrainingLog out;
  if (kd.mode == KDMode::kOffline) {
    TrainingHooks hooks;
    hooks.monitor_teacher = setup.teacher;
    out = train_offline(*student, generated, kd, hooks);
  } else {
    Rng online(Rng::derive(seed, {kTagOnline}));
    out = train_online(*student, *setup.teacher, generated, kd, online);
  }
  if (log) *log = std::move(out);
  if (data) *data = std::move(generated);
  return student;
}

std::uint64_t cell_seed(std::uint64_t seed, Temperature kd_tau,
                        Temperature decode_tau) {
  return Rng::derive(seed, {kTagDecode, Milli(kd_tau.value()),
                            Milli(decode_tau.value())});
}

std::uint64_t recipe_hash(const DistillSetup& setup, const DraftRecipe& recipe,
                          std::uint64_t seed) {
  Fnv h;
  h.bytes("draft-v1");
  HashModel(h, *setup.teacher);
  HashModel(h, *setup.student_init);
  h.u64(setup.train_prompts.size());
  for (const auto& p : setup.train_prompts) {
    h.u64(p.size());
    for (TokenId t : p) h.u64(t);
  }
  const KDConfig& kd = recipe.kd;
  h.u64(static_cast<std::uint64_t>(kd.mode));
  h.u64(recipe.tau_set.size());
  for (Temperature t : recipe.tau_set) h.f64(t.value());
  h.f64(kd.lambda);
  h.f64(kd.loss_ratio);
  h.f64(kd.learning_rate);
  h.u64(kd.steps);
  h.u64(kd.max_new_tokens);
  h.u64(seed);
  return h.value();
}

std::unique_ptr<LanguageModel> cached_draft(
    const DistillSetup& setup, const DraftRecipe& recipe, std::uint64_t seed,
    const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return train_draft(setup, recipe, seed);
  char name[64];
  std::snprintf(name, sizeof(name), "draft-%016llx.ckpt",
                static_cast<unsigned long long>(
                    recipe_hash(setup, recipe, seed)));
  const auto path = cache_dir / name;
  if (std::filesystem::exists(path)) return load_checkpoint(path);
  auto draft = train_draft(setup, recipe, seed);
  std::filesystem::create_directories(cache_dir);
  const auto tmp = cache_dir / (std::string(name) + ".tmp");
  save_checkpoint(*draft, tmp);
  std::filesystem::rename(tmp, path);
  return draft;
}

const SweepCell& SweepResult::at(std::size_t kd, std::size_t dec,
                                 std::size_t seed) const {
  return cells[(kd * decode_taus.size() + dec) * seeds.size() + seed];
}

double SweepResult::mean_alpha(std::size_t kd, std::size_t dec) const {
  double s = 0.0;
  for (std::size_t k = 0; k < seeds.size(); ++k) s += at(kd, dec, k).stats.alpha;
  return s / static_cast<double>(seeds.size());
}

SweepResult run_sweep(const DistillSetup& setup, const SweepConfig& config) {
  if (config.kd_taus.empty() || config.decode_taus.empty() ||
      config.seeds.empty()) {
    throw DomainError("sweep axes must be non-empty");
  }
  SweepResult result;
  result.kd_taus = SortedUnique(config.kd_taus);
  result.decode_taus = SortedUnique(config.decode_taus);
  result.seeds = config.seeds;
  result.block_size = config.decode.block_size;
  result.corpus_id = config.corpus_id;
  result.kd_mode = config.kd.mode;
  const std::size_t nk = result.kd_taus.size();
  const std::size_t nd = result.decode_taus.size();
  const std::size_t ns = result.seeds.size();

  std::vector<std::unique_ptr<LanguageModel>> drafts(nk * ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t k = 0; k < nk; ++k) {
      DraftRecipe recipe{config.kd, {Temperature(result.kd_taus[k])}};
      try {
        drafts[k * ns + s] =
            cached_draft(setup, recipe, result.seeds[s], config.cache_dir);
      } catch (const TrainingError& e) {
        char where[96];
        std::snprintf(where, sizeof(where), "sweep cell kd_tau=%.6f seed=%llu: ",
                      result.kd_taus[k],
                      static_cast<unsigned long long>(result.seeds[s]));
        throw TrainingError(where + std::string(e.what()));
      }
    }
  }

  result.cells.resize(nk * nd * ns);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t c = next++; c < result.cells.size(); c = next++) {
      const std::size_t s = c % ns;
      const std::size_t d = (c / ns) % nd;
      const std::size_t k = c / (ns * nd);
      SweepCell& cell = result.cells[c];
      cell.kd_tau = result.kd_taus[k];
      cell.decode_tau = result.decode_taus[d];
      cell.seed = result.seeds[s];
      GenerationConfig gen = config.decode;
      gen.tau_decode = Temperature(cell.decode_tau);
      gen.seed = cell_seed(cell.seed, Temperature(cell.kd_tau), gen.tau_decode);
      DecodeOptions opts;
      opts.runs = config.runs;
      opts.timing = config.timing;
      opts.keep_traces = config.keep_traces;
      try {
        cell.stats = measure_decode(*setup.teacher, *drafts[k * ns + s],
                                    setup.eval_prompts, gen, opts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<SweepRow> sweep_rows(const SweepResult& result) {
  std::vector<SweepRow> rows;
  rows.reserve(result.cells.size());
  for (const auto& c : result.cells) {
    rows.push_back({c.kd_tau, c.decode_tau, c.seed, c.stats.alpha,
                    c.stats.speedup, c.stats.tokens_out,
                    c.stats.wall_time_spec, c.stats.wall_time_base});
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.kd_tau != b.kd_tau) return a.kd_tau < b.kd_tau;
    if (a.decode_tau != b.decode_tau) return a.decode_tau < b.decode_tau;
    return a.seed < b.seed;
  });
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "kd_tau,decode_tau,seed,alpha,speedup,tokens_out,wall_spec_s,"
         "wall_base_s\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%llu,%.6f,%.6f,%zu,%.6f,%.6f\n",
                  r.kd_tau, r.decode_tau,
                  static_cast<unsigned long long>(r.seed), r.alpha, r.speedup,
                  r.tokens_out, r.wall_spec_s, r.wall_base_s);
    out << buf;
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "kd_tau,decode_tau,seed,alpha,speedup,tokens_out,wall_spec_s,"
              "wall_base_s") {
    throw ParseError("sweep csv: unexpected header");
  }
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    auto bad = [&] {
      return ParseError("sweep csv line " + std::to_string(lineno) +
                        ": malformed row");
    };
    if (f.size() != 8) throw bad();
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0') throw bad();
      return v;
    };
    auto uint = [&](const std::string& s) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
      if (s.empty() || *end != '\0' || s[0] == '-') throw bad();
      return static_cast<std::uint64_t>(v);
    };
    SweepRow r;
    r.kd_tau = num(f[0]);
    r.decode_tau = num(f[1]);
    r.seed = uint(f[2]);
    r.alpha = num(f[3]);
    r.speedup = num(f[4]);
    r.tokens_out = static_cast<std::size_t>(uint(f[5]));
    r.wall_spec_s = num(f[6]);
    r.wall_base_s = num(f[7]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_sweep_csv(in);
}

std::string trace_file_name(double kd_tau, double decode_tau,
                            std::uint64_t seed) {
  return Format("kd%.2f_dec%.2f_seed%llu.trace", kd_tau, decode_tau, seed);
}

void write_sweep_traces(const SweepResult& result,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& c : result.cells) {
    std::ofstream out(dir / trace_file_name(c.kd_tau, c.decode_tau, c.seed));
    if (!out) throw ConfigError("cannot write traces under " + dir.string());
    const std::size_t runs = std::max<std::size_t>(1, c.stats.runs);
    const std::size_t per_run = c.stats.traces.size() / runs;
    for (std::size_t t = 0; t < c.stats.traces.size(); ++t) {
      out << "# run=" << t / per_run << " prompt=" << t % per_run << '\n';
      write_trace(c.stats.traces[t], out);
    }
  }
}

}  // namespace sdlab
