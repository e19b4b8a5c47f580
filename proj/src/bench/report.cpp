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
#include "sdlab/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "sdlab/errors.hpp"

namespace sdlab {
namespace {

constexpr double kTauEps = 1e-9;
const double kOutOfRange[] = {1.5, 2.0};

std::string Fmt(const char* fmt, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, x);
  return buf;
}

const CellSummary* Find(std::span<const CellSummary> cells, double kd,
                        double dec) {
  for (const auto& c : cells) {
    if (std::abs(c.kd_tau - kd) < kTauEps &&
        std::abs(c.decode_tau - dec) < kTauEps) {
      return &c;
    }
  }
  return nullptr;
}

void Heatmap(std::string& out, std::span<const CellSummary> cells,
             const std::vector<double>& kds, const std::vector<double>& decs,
             bool speedup) {
  out += "| decode \\ kd |";
  for (double k : kds) out += Fmt(" %.1f |", k);
  out += "\n|---|";
  for (std::size_t i = 0; i < kds.size(); ++i) out += "---|";
  out += '\n';
  for (double d : decs) {
    out += Fmt("| %.1f |", d);
    for (double k : kds) {
      const CellSummary* c = Find(cells, k, d);
      if (!c) {
        out += " - |";
      } else {
        out += Fmt(" %.3f |", speedup ? c->mean_speedup : c->mean_alpha);
      }
    }
    out += '\n';
  }
}

}  // namespace

std::vector<CellSummary> summarize(std::span<const SweepRow> rows) {
  std::map<std::pair<double, double>, CellSummary> acc;
  for (const auto& r : rows) {
    auto& c = acc[{r.kd_tau, r.decode_tau}];
    c.kd_tau = r.kd_tau;
    c.decode_tau = r.decode_tau;
    c.mean_alpha += r.alpha;
    c.mean_speedup += r.speedup;
    ++c.seeds;
  }
  std::vector<CellSummary> out;
  for (auto& [key, c] : acc) {
    c.mean_alpha /= static_cast<double>(c.seeds);
    c.mean_speedup /= static_cast<double>(c.seeds);
    out.push_back(c);
  }
  return out;
}

std::vector<BestKd> best_kd_per_decode(std::span<const CellSummary> cells) {
  std::map<double, BestKd> best;
  for (const auto& c : cells) {
    auto it = best.find(c.decode_tau);
    if (it == best.end()) {
      best[c.decode_tau] = {c.decode_tau, c.kd_tau, c.mean_alpha};
    } else if (c.mean_alpha > it->second.mean_alpha ||
               (c.mean_alpha == it->second.mean_alpha &&
                c.kd_tau < it->second.kd_tau)) {
      it->second = {c.decode_tau, c.kd_tau, c.mean_alpha};
    }
  }
  std::vector<BestKd> out;
  for (auto& [d, b] : best) out.push_back(b);
  return out;
}

double diagonal_score(std::span<const BestKd> best,
                      std::span<const double> decode_taus, double tol) {
  std::size_t hits = 0, total = 0;
  for (const auto& b : best) {
    if (!decode_taus.empty() &&
        std::none_of(decode_taus.begin(), decode_taus.end(), [&](double d) {
          return std::abs(d - b.decode_tau) < kTauEps;
        })) {
      continue;
    }
    ++total;
    if (std::abs(b.kd_tau - b.decode_tau) <= tol + kTauEps) ++hits;
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

std::string render_report(std::span<const SweepRow> rows) {
  if (rows.empty()) throw DomainError("report: no sweep rows");
  const auto cells = summarize(rows);
  std::set<double> kd_set, dec_set;
  for (const auto& c : cells) {
    kd_set.insert(c.kd_tau);
    dec_set.insert(c.decode_tau);
  }
  const std::vector<double> kds(kd_set.begin(), kd_set.end());
  const std::vector<double> decs(dec_set.begin(), dec_set.end());

  std::string out = "# Sweep report\n\n";
  out += "cells: " + std::to_string(cells.size()) + "\n";
  out += "rows: " + std::to_string(rows.size()) + "\n\n";

  out += "## Mean acceptance rate (rows: decode tau, columns: KD tau)\n\n";
  Heatmap(out, cells, kds, decs, false);
  out += "\n## Mean speedup (rows: decode tau, columns: KD tau)\n\n";
  Heatmap(out, cells, kds, decs, true);

  out += "\n## Best KD temperature per decoding temperature\n\n";
  const auto best = best_kd_per_decode(cells);
  std::size_t hits = 0;
  for (const auto& b : best) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "best decode_tau=%.6f kd_tau=%.6f alpha=%.6f\n",
                  b.decode_tau, b.kd_tau, b.mean_alpha);
    out += buf;
    if (std::abs(b.kd_tau - b.decode_tau) <= 0.1 + kTauEps) ++hits;
  }
  {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "\ndiagonal score: %.6f (%zu of %zu within 0.1)\n",
                  diagonal_score(best), hits, best.size());
    out += buf;
  }

  bool any_range = false;
  for (double d : kOutOfRange) {
    if (!dec_set.count(d)) continue;
    if (!any_range) {
      out += "\n## Out-of-range decoding temperatures\n\n";
      any_range = true;
    }
    out += Fmt("decode_tau=%.1f:", d);
    for (double k : kds) {
      if (const CellSummary* c = Find(cells, k, d)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " kd%.1f=%.3f/%.3fx", k, c->mean_alpha,
                      c->mean_speedup);
        out += buf;
      }
    }
    out += '\n';
  }

  std::string sym;
  for (double a : kds) {
    for (double b : kds) {
      if (!(a < b) || !dec_set.count(a) || !dec_set.count(b)) continue;
      const CellSummary* ab = Find(cells, a, b);
      const CellSummary* ba = Find(cells, b, a);
      if (!ab || !ba) continue;
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "kd=%.1f dec=%.1f alpha=%.3f | kd=%.1f dec=%.1f "
                    "alpha=%.3f\n",
                    a, b, ab->mean_alpha, b, a, ba->mean_alpha);
      sym += buf;
    }
  }
  if (!sym.empty()) out += "\n## Symmetric temperature pairs\n\n" + sym;

  std::vector<double> alphas, speedups;
  for (const auto& c : cells) {
    alphas.push_back(c.mean_alpha);
    speedups.push_back(c.mean_speedup);
  }
  out += Fmt("\nspearman(alpha, speedup): %.6f\n", spearman(alphas, speedups));
  return out;
}

std::string render_composition(std::span<const CompositionRow> rows) {
  std::string out =
      "| decode tau | alpha single | alpha composed | delta alpha | "
      "speedup single | speedup composed | delta speedup |\n"
      "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "| %.1f | %.6f | %.6f | %+.6f | %.6f | %.6f | %+.6f |\n",
                  r.decode_tau, r.alpha_single, r.alpha_composed,
                  r.delta_alpha, r.speedup_single, r.speedup_composed,
                  r.delta_speedup);
    out += buf;
  }
  return out;
}

}  // namespace sdlab
