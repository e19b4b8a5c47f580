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

#include <sstream>

#include "gtest/gtest.h"
#include "sdlab/errors.hpp"

namespace sdlab {
namespace {

RunConfig Parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string ErrorOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, Defaults) {
  const auto c = Parse("");
  EXPECT_EQ(c.corpus.vocab_size, 32u);
  EXPECT_EQ(c.corpus.order, 2u);
  EXPECT_EQ(c.kd.mode, KDMode::kOffline);
  EXPECT_EQ(c.kd.lambda, 0.5);
  EXPECT_EQ(c.kd.loss_ratio, 1.0);
  EXPECT_EQ(c.decode.gen.block_size, 4u);
  EXPECT_EQ(c.decode.runs, 5u);
  EXPECT_EQ(c.sweep.kd_taus.size(), 11u);
  EXPECT_EQ(c.sweep.decode_taus, (std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}));
  EXPECT_EQ(c.sweep.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(c.compose.tau_set, (std::vector<double>{1.0, 0.9, 0.8}));
}

TEST(Config, CanonicalFileParses) {
  const auto c = load_config(std::filesystem::path(SDLAB_SOURCE_DIR) / "configs/canonical.cfg");
  EXPECT_EQ(c.corpus.context_weight, 0.25);
  EXPECT_EQ(c.kd.steps, 1000u);
  EXPECT_EQ(c.sweep.decode_taus.size(), 8u);
  EXPECT_EQ(c.output_dir, std::filesystem::path("out/canonical"));
}

TEST(Config, ValuesAndComments) {
  const auto c = Parse(
      "# header\n"
      "\n"
      "corpus.vocab_size = 16   # trailing comment\n"
      "corpus.concentration=0.5\n"
      "models.teacher_family = neural\n"
      "models.teacher_context = 3\n"
      "models.draft_family = neural\n"
      "models.draft_hidden = 12\n"
      "kd.mode = online\n"
      "kd.tau_gen = 0.7\n"
      "kd.domain = out\n"
      "decode.tau = 0\n"
      "sweep.kd_taus = 0.5, 0.1\n"
      "sweep.seeds = 7,8\n"
      "sweep.dump_traces = true\n"
      "compose.tau_set = 0.9,0.8,0.7\n"
      "io.output_dir = somewhere/else\n");
  EXPECT_EQ(c.corpus.vocab_size, 16u);
  EXPECT_EQ(c.corpus.concentration, 0.5);
  EXPECT_EQ(c.models.teacher.family, ModelFamily::kNeural);
  EXPECT_EQ(c.models.teacher.shape.context, 3u);
  EXPECT_EQ(c.models.draft_family, ModelFamily::kNeural);
  EXPECT_EQ(c.models.draft_shape.hidden, 12u);
  EXPECT_EQ(c.kd.mode, KDMode::kOnline);
  EXPECT_EQ(c.kd.tau_gen, Temperature(0.7));
  EXPECT_EQ(c.kd_domain, DomainId::kOut);
  EXPECT_TRUE(c.decode.gen.tau_decode.greedy());
  EXPECT_EQ(c.sweep.kd_taus, (std::vector<double>{0.5, 0.1}));
  EXPECT_EQ(c.sweep.seeds, (std::vector<std::uint64_t>{7, 8}));
  EXPECT_TRUE(c.sweep.dump_traces);
  EXPECT_EQ(c.compose.tau_set, (std::vector<double>{0.9, 0.8, 0.7}));
  EXPECT_EQ(c.output_dir, std::filesystem::path("somewhere/else"));
}

TEST(Config, UnknownKeyIsNamed) {
  const auto msg = ErrorOf("corpus.seed = 3\ncorpus.vocab = 12\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'corpus.vocab'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;
}

TEST(Config, RepeatedKeyIsNamed) {
  const auto msg = ErrorOf("kd.steps = 3\nkd.steps = 4\n");
  EXPECT_NE(msg.find("'kd.steps'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("repeated"), std::string::npos) << msg;
}

TEST(Config, BadValuesAreNamed) {
  for (const std::string text :
       {"kd.steps = -3\n", "kd.lambda = lots\n", "kd.mode = sideways\n",
        "sweep.dump_traces = maybe\n", "decode.tau = -1\n", "sweep.domain = mars\n",
        "models.teacher_family = rnn\n", "sweep.kd_taus = 0.1,,0.2\n"}) {
    const auto msg = ErrorOf(text);
    const std::string key = text.substr(0, text.find(' '));
    EXPECT_NE(msg.find("'" + key + "'"), std::string::npos) << text << " -> " << msg;
  }
  EXPECT_NE(ErrorOf("just words\n").find("line 1"), std::string::npos);
}

TEST(Config, CrossFieldValidation) {
  EXPECT_FALSE(ErrorOf("kd.lambda = 1.5\n").empty());
  EXPECT_FALSE(ErrorOf("corpus.vocab_size = 2000\n").empty());
  EXPECT_FALSE(ErrorOf("decode.block_size = 0\n").empty());
  EXPECT_FALSE(ErrorOf("decode.runs = 0\n").empty());
  EXPECT_FALSE(ErrorOf("corpus.out_concentration = 0\n").empty());
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), ParseError);
}

TEST(Config, BuildOptionsCarryModelSettings) {
  const auto c = Parse(
      "models.teacher_steps = 123\nmodels.teacher_tolerance = 0.2\n"
      "corpus.n_eval_prompts = 9\ncorpus.out_concentration = 0.3\n");
  const auto o = c.build_options();
  EXPECT_EQ(o.teacher_steps, 123u);
  EXPECT_EQ(o.teacher.tolerance, 0.2);
  EXPECT_EQ(o.n_eval_prompts, 9u);
  EXPECT_EQ(o.out_concentration, 0.3);
}

TEST(Overrides, SeedRenumbersEverything) {
  auto c = Parse("sweep.seeds = 0,1,2\n");
  Overrides o;
  apply_overrides(c, o);
  EXPECT_EQ(c.corpus.seed, 1u);
  o.seed = 40;
  apply_overrides(c, o);
  EXPECT_EQ(c.corpus.seed, 40u);
  EXPECT_EQ(c.kd.seed, 40u);
  EXPECT_EQ(c.decode.gen.seed, 40u);
  EXPECT_EQ(c.sweep.seeds, (std::vector<std::uint64_t>{40, 41, 42}));
}

}  // namespace
}  // namespace sdlab
