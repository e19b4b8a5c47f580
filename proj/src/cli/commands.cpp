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
#include "sdlab/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "sdlab/bench/report.hpp"
#include "sdlab/bench/sweep.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/lm/checkpoint.hpp"

namespace sdlab {
namespace {

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void Require(const std::filesystem::path& path, const char* hint) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing " + path.string() + "; run '" + hint +
                      "' first");
  }
}

std::string Line(const char* fmt, double x) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), fmt, x);
  return buf;
}

void WriteCorpusLog(std::ostream& out, DomainId d, const TeacherResult& t) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "domain=%s heldout_ce=%.17g entropy_rate=%.17g steps=%zu "
                "contexts=%zu\n",
                std::string(to_string(d)).c_str(), t.heldout_ce,
                t.entropy_rate, t.steps_run, t.heldout_contexts.size());
  out << buf;
}

void WriteStats(std::ostream& out, const DecodeStats& s) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "decode_tau=%.6f\nalpha=%.6f\nspeedup=%.6f\ntokens_out=%zu\n"
                "wall_spec_s=%.6f\nwall_base_s=%.6f\nruns=%zu\n"
                "draft_proposed=%zu\ndraft_accepted=%zu\n",
                s.decode_tau.value(), s.alpha, s.speedup, s.tokens_out,
                s.wall_time_spec, s.wall_time_base, s.runs, s.draft_proposed,
                s.draft_accepted);
  out << buf;
}

std::vector<Temperature> Taus(const std::vector<double>& v) {
  std::vector<Temperature> out;
  for (double x : v) out.emplace_back(x);
  return out;
}

}  // namespace

std::filesystem::path Layout::teacher(DomainId d) const {
  return corpus() / ("teacher_" + std::string(to_string(d)) + ".ckpt");
}
std::filesystem::path Layout::ground_truth(DomainId d) const {
  return corpus() / ("gt_" + std::string(to_string(d)) + ".ckpt");
}
std::filesystem::path Layout::prompts(DomainId d) const {
  return corpus() / ("prompts_" + std::string(to_string(d)) + ".txt");
}
std::filesystem::path Layout::eval_prompts(DomainId d) const {
  return corpus() / ("eval_" + std::string(to_string(d)) + ".txt");
}
std::filesystem::path Layout::heldout(DomainId d) const {
  return corpus() / ("heldout_" + std::string(to_string(d)) + ".txt");
}

LoadedDomain load_domain(const Layout& layout, DomainId domain) {
  for (const auto& p : {layout.teacher(domain), layout.prompts(domain),
                        layout.eval_prompts(domain)}) {
    Require(p, "sdlab corpus");
  }
  LoadedDomain d;
  d.teacher = load_checkpoint(layout.teacher(domain));
  d.train_prompts = read_prompts(layout.prompts(domain));
  d.eval_prompts = read_prompts(layout.eval_prompts(domain));
  for (const auto& p : d.train_prompts) d.teacher->vocab().check(p);
  for (const auto& p : d.eval_prompts) d.teacher->vocab().check(p);
  return d;
}

std::unique_ptr<LanguageModel> make_student_init(const RunConfig& config) {
  const Vocab vocab = config.corpus.vocab();
  if (config.models.draft_family == ModelFamily::kNGram) {
    return std::make_unique<NGramLogitLM>(vocab, config.models.draft_order);
  }
  return std::make_unique<TinyNeuralLM>(vocab, config.models.draft_shape,
                                        config.models.draft_init_seed);
}

void cmd_corpus(const RunConfig& config, const Overrides&, std::ostream& log) {
  const Layout layout{config.output_dir};
  std::filesystem::create_directories(layout.corpus());
  const CorpusBundle bundle =
      build_corpus(config.corpus, config.build_options());

  std::ofstream corpus_log = OpenOut(layout.corpus() / "corpus_log.txt");
  for (DomainId d : {DomainId::kIn, DomainId::kOut}) {
    const Domain& dom = d == DomainId::kIn ? bundle.in_domain
                                           : bundle.out_domain;
    save_checkpoint(*dom.ground_truth, layout.ground_truth(d));
    save_checkpoint(*dom.teacher.model, layout.teacher(d));
    write_prompts(dom.train_prompts, layout.prompts(d));
    write_prompts(dom.eval_prompts, layout.eval_prompts(d));
    write_prompts(dom.teacher.heldout_contexts, layout.heldout(d));
    WriteCorpusLog(corpus_log, d, dom.teacher);

    // the saved teacher must reproduce the logged held-out CE
    auto reloaded = load_checkpoint(layout.teacher(d));
    const auto [h, ce] = heldout_ce(*dom.ground_truth, *reloaded,
                                    read_prompts(layout.heldout(d)));
    if (ce != dom.teacher.heldout_ce || h != dom.teacher.entropy_rate) {
      throw InternalError("teacher checkpoint does not round-trip");
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "%s-domain teacher: held-out CE %.4f, entropy rate %.4f, "
                  "%zu steps\n",
                  std::string(to_string(d)).c_str(), dom.teacher.heldout_ce,
                  dom.teacher.entropy_rate, dom.teacher.steps_run);
    log << buf;
  }
  if (!corpus_log) throw ConfigError("failed writing corpus_log.txt");
}

void cmd_distill(const RunConfig& config, const Overrides&,
                 std::ostream& log) {
  const Layout layout{config.output_dir};
  LoadedDomain dom = load_domain(layout, config.kd_domain);
  auto init = make_student_init(config);
  std::filesystem::create_directories(layout.distill());
  save_checkpoint(*init, layout.distill() / "student_init.ckpt");

  DistillSetup setup{dom.teacher.get(), init.get(), dom.train_prompts,
                     dom.eval_prompts};
  DraftRecipe recipe{config.kd, {config.kd.tau_gen}};
  TrainingLog train_log;
  Dataset data;
  auto draft = train_draft(setup, recipe, config.kd.seed, &train_log, &data);

  save_checkpoint(*draft, layout.distill() / "draft.ckpt");
  write_dataset(data, layout.distill() / "dataset.txt");
  std::ofstream csv = OpenOut(layout.distill() / "train_log.csv");
  write_training_log(train_log, csv);
  if (!csv) throw ConfigError("failed writing train_log.csv");

  log << "trained " << to_string(config.kd.mode) << " draft for "
      << config.kd.steps << " steps"
      << Line(" at tau_gen %.2f", config.kd.tau_gen.value());
  if (!train_log.records.empty()) {
    log << Line(", final lm_loss %.4f", train_log.records.back().lm_loss)
        << Line(", fkl %.4f", train_log.records.back().fkl);
  }
  log << '\n';
}

void cmd_decode(const RunConfig& config, const Overrides& o,
                std::ostream& log) {
  const Layout layout{config.output_dir};
  LoadedDomain dom = load_domain(layout, config.decode.domain);
  const auto draft_path = layout.distill() / "draft.ckpt";
  Require(draft_path, "sdlab distill");
  auto draft = load_checkpoint(draft_path);

  DecodeOptions opts;
  opts.runs = config.decode.runs;
  opts.timing = o.timing;
  opts.keep_traces = true;
  opts.keep_generations = true;
  const DecodeStats stats = measure_decode(*dom.teacher, *draft,
                                           dom.eval_prompts,
                                           config.decode.gen, opts);

  std::filesystem::create_directories(layout.decode());
  {
    std::ofstream out = OpenOut(layout.decode() / "stats.txt");
    WriteStats(out, stats);
  }
  {
    std::ofstream out = OpenOut(layout.decode() / "traces.txt");
    const std::size_t n = dom.eval_prompts.size();
    for (std::size_t t = 0; t < stats.traces.size(); ++t) {
      out << "# run=" << t / n << " prompt=" << t % n << '\n';
      write_trace(stats.traces[t], out);
    }
  }
  write_prompts(stats.generations, layout.decode() / "generations.txt");
  {
    std::ofstream out = OpenOut(layout.decode() / "lengths.txt");
    const auto hist = token_length_stats(stats.generations,
                                         config.decode.gen.max_new_tokens);
    for (const auto& b : hist.buckets) {
      out << b.lo << '-' << b.hi << ' ' << b.count << '\n';
    }
  }
  log << Line("alpha %.6f", stats.alpha) << Line(" speedup %.3f", stats.speedup)
      << " tokens " << stats.tokens_out << '\n';
}

void cmd_sweep(const RunConfig& config, const Overrides& o, std::ostream& log) {
  const Layout layout{config.output_dir};
  LoadedDomain dom = load_domain(layout, config.sweep.domain);
  auto init = make_student_init(config);
  DistillSetup setup{dom.teacher.get(), init.get(), dom.train_prompts,
                     dom.eval_prompts};

  SweepConfig sc;
  sc.kd_taus = config.sweep.kd_taus;
  sc.decode_taus = config.sweep.decode_taus;
  sc.seeds = config.sweep.seeds;
  sc.kd = config.kd;
  sc.decode = config.decode.gen;
  sc.runs = config.decode.runs;
  sc.jobs = o.jobs;
  sc.timing = o.timing;
  sc.keep_traces = config.sweep.dump_traces;
  sc.cache_dir = layout.cache();
  sc.corpus_id = std::string(to_string(config.sweep.domain));
  const SweepResult result = run_sweep(setup, sc);

  std::filesystem::create_directories(layout.sweep());
  const auto rows = sweep_rows(result);
  {
    std::ofstream out = OpenOut(layout.sweep() / "sweep.csv");
    write_sweep_csv(rows, out);
    if (!out) throw ConfigError("failed writing sweep.csv");
  }
  if (config.sweep.dump_traces) {
    write_sweep_traces(result, layout.sweep() / "traces");
  }
  const auto cells = summarize(rows);
  log << "sweep: " << cells.size() << " cells, " << rows.size() << " rows"
      << Line(", diagonal score %.3f", diagonal_score(best_kd_per_decode(cells)))
      << '\n';
}

void cmd_compose(const RunConfig& config, const Overrides& o,
                 std::ostream& log) {
  const Layout layout{config.output_dir};
  LoadedDomain dom = load_domain(layout, config.sweep.domain);
  auto init = make_student_init(config);
  DistillSetup setup{dom.teacher.get(), init.get(), dom.train_prompts,
                     dom.eval_prompts};
  const Temperature single_tau(config.compose.single_tau);
  const DraftRecipe single{config.kd, {single_tau}};
  const DraftRecipe composed{config.kd, Taus(config.compose.tau_set)};

  std::filesystem::create_directories(layout.compose());
  std::ofstream csv = OpenOut(layout.compose() / "composition.csv");
  std::ofstream md = OpenOut(layout.compose() / "composition.md");
  csv << "seed,decode_tau,alpha_single,alpha_composed,delta_alpha,"
         "speedup_single,speedup_composed,delta_speedup\n";
  md << "# Temperature composition\n\n";
  std::size_t nonneg = 0, total = 0;
  for (std::uint64_t seed : config.sweep.seeds) {
    auto a = cached_draft(setup, single, seed, layout.cache());
    auto b = cached_draft(setup, composed, seed, layout.cache());
    std::vector<DecodeStats> sa, sb;
    for (double d : config.compose.decode_taus) {
      GenerationConfig gen = config.decode.gen;
      gen.tau_decode = Temperature(d);
      gen.seed = cell_seed(seed, single_tau, gen.tau_decode);
      DecodeOptions opts;
      opts.runs = config.decode.runs;
      opts.timing = o.timing;
      sa.push_back(measure_decode(*dom.teacher, *a, dom.eval_prompts, gen,
                                  opts));
      sb.push_back(measure_decode(*dom.teacher, *b, dom.eval_prompts, gen,
                                  opts));
    }
    const auto rows = compare_composition(sa, sb);
    md << "## seed " << seed << "\n\n" << render_composition(rows) << '\n';
    for (const auto& r : rows) {
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    static_cast<unsigned long long>(seed), r.decode_tau,
                    r.alpha_single, r.alpha_composed, r.delta_alpha,
                    r.speedup_single, r.speedup_composed, r.delta_speedup);
      csv << buf;
      ++total;
      if (r.delta_alpha >= 0.0) ++nonneg;
    }
  }
  md << "delta alpha >= 0 in " << nonneg << " of " << total << " rows\n";
  if (!csv || !md) throw ConfigError("failed writing composition outputs");
  log << "composition: delta alpha >= 0 in " << nonneg << " of " << total
      << " rows\n";
}

std::string cmd_report(std::span<const std::filesystem::path> csv_paths) {
  if (csv_paths.empty()) {
    throw UsageError("report needs at least one sweep CSV");
  }
  std::vector<SweepRow> rows;
  for (const auto& p : csv_paths) {
    auto r = read_sweep_csv(p);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return render_report(rows);
}

}  // namespace sdlab
