// Copyright 2026 The lipsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark suites on seeded random instances, reported as CSV. Wall times
// are written only on request so that reports are byte-reproducible.

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/instances.hpp"
#include "lipsel/oracle.hpp"
#include "lipsel/random.hpp"
#include "lipsel/selection.hpp"

namespace lipsel::bench {

struct BenchOptions {
  std::string suite = "selection-ratio";
  std::uint64_t seed = 0;
  int count = 100;
  std::vector<int> sizes;  ///< vertex counts, cycled over instances; empty means the suite default
  bool timing = false;
  SelectOptions select;
};

/** One instance of either suite; fields a suite does not fill stay at defaults. */
struct BenchRow {
  int id = 0;
  int n = 0;
  int k = 0;
  int vertices = 0;
  bool sparse = false;
  bool planted = true;
  double lambda_star = 0.0;     ///< global oracle optimum
  double subset_max = 0.0;      ///< finiteness suite: max over admissible subsets
  std::size_t subsets = 0;
  bool engine_ok = false;
  std::string failure;          ///< hypothesis-failure message when !engine_ok
  double seminorm = kInf;
  double ratio = kInf;          ///< seminorm / lambda_star
  bool degenerate = false;      ///< lambda_star ~ 0: the flats share a point, ratio undefined
  double stage_constant = 0.0;
  double max_membership = 0.0;  ///< largest |f(v) - proj_F(v) f(v)|
  double wall_ms = 0.0;
};

inline std::vector<int> default_sizes(const std::string& suite) {
  if (suite == "finiteness") return {3, 4, 5, 6};
  return {4, 6, 8};
}

/// Optima at or below this are treated as zero when forming ratios.
inline constexpr double kRatioFloor = 1e-9;

inline bool known_suite(const std::string& suite) { return suite == "selection-ratio" || suite == "finiteness"; }

namespace detail {

inline BenchRow run_engine(const AffineMap& am, const SelectOptions& opt, BenchRow row) {
  try {
    const Selection s = select_affine(am, opt);
    row.engine_ok = true;
    row.seminorm = s.seminorm;
    row.stage_constant = s.diagnostics.stage_constant;
    for (std::size_t v = 0; v < am.flats.size(); ++v)
      row.max_membership = std::max(row.max_membership, am.flats[v].residual(s.points[v]));
    row.degenerate = row.lambda_star <= kRatioFloor;
    row.ratio = row.degenerate ? kInf : row.seminorm / row.lambda_star;
  } catch (const HypothesisFailure& e) {
    row.failure = e.what();
  }
  return row;
}

}  // namespace detail

/**
 * "selection-ratio": planted instances (n <= 3, k <= 2, complete and sparse
 * graphs), oracle optimum against the engine. "finiteness": planted and
 * unplanted instances, subset maximum over admissible subsets of size
 * <= 2^(k+1) against the global optimum and engine success.
 */
inline std::vector<BenchRow> run_suite(const BenchOptions& opt) {
  require(known_suite(opt.suite), "bench: unknown suite '" + opt.suite + "'");
  require(opt.count >= 0, "bench: instance count must be non-negative");
  const std::vector<int> sizes = opt.sizes.empty() ? default_sizes(opt.suite) : opt.sizes;
  for (int s : sizes) require(s >= 1 && s <= 12, "bench: vertex counts must lie in [1, 12]");
  const bool finiteness = opt.suite == "finiteness";
  std::vector<BenchRow> rows;
  for (int id = 0; id < opt.count; ++id) {
    Rng rng(substream_seed(opt.seed, static_cast<std::uint64_t>(id)));
    instances::SelectionParams p;
    p.n = rng.integer(1, 3);
    p.k = rng.integer(0, 2);
    p.vertices = sizes[static_cast<std::size_t>(id) % sizes.size()];
    p.sparse = rng.coin(0.5);
    p.planted = finiteness ? rng.coin(0.5) : true;
    const AffineMap am = instances::random_affine_map(rng, p);

    const auto start = std::chrono::steady_clock::now();
    BenchRow row;
    row.id = id;
    row.n = p.n;
    row.k = p.k;
    row.vertices = p.vertices;
    row.sparse = p.sparse;
    row.planted = p.planted;
    row.lambda_star = optimal_selection_lp(am.graph.rho, am.flats, opt.select.tol).lambda_star;
    if (finiteness) {
      const OracleReport rep = finiteness_check(am, opt.select.tol);
      row.subset_max = rep.lambda_star;
      row.subsets = rep.subset_results.size();
    }
    row = detail::run_engine(am, opt.select, row);
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

inline std::string csv_number(double v) {
  if (is_inf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/** CSV report with one row per instance and a trailing summary row. */
inline std::string to_csv(const std::string& suite, const std::vector<BenchRow>& rows, bool timing) {
  const bool finiteness = suite == "finiteness";
  std::string out = finiteness ? "id,n,k,vertices,graph,planted,lambda_star,subset_max,subsets,engine,seminorm,"
                                 "stage_constant,wall_ms\n"
                               : "id,n,k,vertices,graph,lambda_star,engine,seminorm,ratio,stage_constant,wall_ms\n";
  double max_ratio = 0.0, worst_gap = -kInf;
  int failures = 0, monotonicity = 0, implication = 0, degenerate = 0;
  for (const auto& r : rows) {
    const std::string wall = timing ? csv_number(r.wall_ms) : "na";
    const std::string graph = r.sparse ? "sparse" : "complete";
    const std::string engine = r.engine_ok ? "ok" : "fail";
    const std::string semi = r.engine_ok ? csv_number(r.seminorm) : "na";
    const std::string stage = r.engine_ok ? csv_number(r.stage_constant) : "na";
    if (!r.engine_ok) ++failures;
    if (finiteness) {
      if (r.subset_max > r.lambda_star + 1e-9 * (1.0 + r.lambda_star)) ++monotonicity;
      if (r.subset_max <= 1.0 && !r.engine_ok) ++implication;
      worst_gap = std::max(worst_gap, r.subset_max - r.lambda_star);
      out += std::to_string(r.id) + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
             std::to_string(r.vertices) + "," + graph + "," + (r.planted ? "yes" : "no") + "," +
             csv_number(r.lambda_star) + "," + csv_number(r.subset_max) + "," + std::to_string(r.subsets) + "," +
             engine + "," + semi + "," + stage + "," + wall + "\n";
    } else {
      if (r.engine_ok && r.degenerate) ++degenerate;
      if (r.engine_ok && !r.degenerate) max_ratio = std::max(max_ratio, r.ratio);
      out += std::to_string(r.id) + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
             std::to_string(r.vertices) + "," + graph + "," + csv_number(r.lambda_star) + "," + engine + "," + semi +
             "," + (r.engine_ok && !r.degenerate ? csv_number(r.ratio) : "na") + "," + stage + "," + wall + "\n";
    }
  }
  // Summary cells are key=value, padded to the header width.
  std::vector<std::string> cells = {"summary", "instances=" + std::to_string(rows.size()),
                                    "failures=" + std::to_string(failures)};
  if (finiteness) {
    cells.push_back("max_gap=" + csv_number(rows.empty() ? 0.0 : worst_gap));
    cells.push_back("monotonicity_violations=" + std::to_string(monotonicity));
    cells.push_back("implication_violations=" + std::to_string(implication));
  } else {
    cells.push_back("max_ratio=" + csv_number(max_ratio));
    cells.push_back("degenerate=" + std::to_string(degenerate));
  }
  const std::size_t width = finiteness ? 13 : 11;
  for (std::size_t i = 0; i < width; ++i) out += (i == 0 ? "" : ",") + (i < cells.size() ? cells[i] : std::string());
  out += "\n";
  return out;
}

inline std::string run(const BenchOptions& opt) { return to_csv(opt.suite, run_suite(opt), opt.timing); }

}  // namespace lipsel::bench
