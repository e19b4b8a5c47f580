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

// Text reports over sweep CSV rows: acceptance and speedup heatmaps, the
// best KD temperature per decoding temperature, out-of-range decoding
// temperatures, symmetric temperature pairs, composition deltas.

#include <span>
#include <string>
#include <vector>

#include "sdlab/bench/decode.hpp"
#include "sdlab/bench/sweep.hpp"

namespace sdlab {

struct CellSummary {
  double kd_tau = 0.0;
  double decode_tau = 0.0;
  double mean_alpha = 0.0;
  double mean_speedup = 0.0;
  std::size_t seeds = 0;
};

// One entry per distinct (kd_tau, decode_tau), sorted.
std::vector<CellSummary> summarize(std::span<const SweepRow> rows);

struct BestKd {
  double decode_tau = 0.0;
  double kd_tau = 0.0;
  double mean_alpha = 0.0;
};

// Ties go to the lowest KD temperature.
std::vector<BestKd> best_kd_per_decode(std::span<const CellSummary> cells);

// Fraction of the listed decoding temperatures (all of them when empty)
// whose best KD temperature lies within tol of the decoding temperature.
double diagonal_score(std::span<const BestKd> best,
                      std::span<const double> decode_taus = {},
                      double tol = 0.1);

// Throws DomainError on an empty row list.
std::string render_report(std::span<const SweepRow> rows);
std::string render_composition(std::span<const CompositionRow> rows);

}  // namespace sdlab
