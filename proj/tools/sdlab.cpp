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
// sdlab: corpus construction, distillation, decoding, sweeps and reports.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdlab/cli/commands.hpp"
#include "sdlab/errors.hpp"
#include "sdlab/kernels/kernels.hpp"

namespace {

int Fail(int code, const std::string& what) {
  std::fprintf(stderr, "sdlab: %s\n", what.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temperature-centric speculative decoding lab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool no_timing = false;
  std::string kernels;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--seed", seed, "Override every seed in the config");
  app.add_option("--jobs", jobs, "Worker threads for sweep cells")
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-timing", no_timing,
               "Skip the baseline and zero every wall-time field");
  app.add_option("--kernels", kernels, "scalar, avx2, neon or auto");

  auto* corpus = app.add_subcommand("corpus", "Build ground truths, teachers and prompts");
  auto* distill = app.add_subcommand("distill", "Train a draft by KD");
  auto* decode = app.add_subcommand("decode", "Measure speculative decoding");
  auto* sweep = app.add_subcommand("sweep", "KD x decoding temperature sweep");
  auto* compose = app.add_subcommand("compose", "Temperature composition comparison");
  auto* report = app.add_subcommand("report", "Render sweep CSVs as markdown");
  std::vector<std::string> csvs;
  report->add_option("csv", csvs, "Sweep CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!kernels.empty() && kernels != "auto") {
      sdlab::kernels::select(sdlab::kernels::parse_backend(kernels));
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
      std::cout << sdlab::cmd_report(paths);
      return 0;
    }
    if (config_path.empty()) {
      return Fail(2, "--config is required for this command");
    }
    sdlab::RunConfig config = sdlab::load_config(config_path);
    sdlab::Overrides o;
    o.seed = seed;
    o.jobs = jobs;
    o.timing = !no_timing;
    sdlab::apply_overrides(config, o);

    if (corpus->parsed()) sdlab::cmd_corpus(config, o, std::cout);
    if (distill->parsed()) sdlab::cmd_distill(config, o, std::cout);
    if (decode->parsed()) sdlab::cmd_decode(config, o, std::cout);
    if (sweep->parsed()) sdlab::cmd_sweep(config, o, std::cout);
    if (compose->parsed()) sdlab::cmd_compose(config, o, std::cout);
    return 0;
  } catch (const sdlab::UsageError& e) {
    return Fail(2, e.what());
  } catch (const sdlab::ParseError& e) {
    return Fail(2, e.what());
  } catch (const std::invalid_argument& e) {
    return Fail(2, e.what());
  } catch (const std::exception& e) {
    return Fail(1, e.what());
  }
}
