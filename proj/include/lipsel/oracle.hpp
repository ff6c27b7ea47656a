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

// Brute-force ground truth built only on the LP kernel: optimal Lipschitz
// selections, subset enumeration for finiteness checks, minimal jet norms,
// and grid convex envelopes.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/envelope.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/selection.hpp"
#include "lipsel/solvers.hpp"
#include "lipsel/whitney.hpp"

namespace lipsel {

struct SubsetResult {
  std::vector<int> subset;
  double lambda = 0.0;
};

struct OracleReport {
  double lambda_star = 0.0;  ///< inf when infeasible
  std::vector<Vector> witness;
  std::vector<SubsetResult> subset_results;
  std::vector<int> worst_subset;
  double wall_ms = 0.0;
};

/// Largest number of subsets an enumeration is allowed to visit.
inline constexpr std::size_t kMaxOracleSubsets = 100000;

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline std::size_t count_subsets(int n, int max_size) {
  std::size_t total = 0;
  double binom = 1.0;
  for (int s = 1; s <= std::min(n, max_size); ++s) {
    binom = binom * (n - s + 1) / s;
    total += static_cast<std::size_t>(std::llround(binom));
    if (total > kMaxOracleSubsets) return total;
  }
  return total;
}

}  // namespace detail

/**
 * min lambda s.t. f(v) = base_v + B_v t_v and |f(v) - f(w)|_inf <= lambda rho(v, w),
 * solved as one LP. Pairs at infinite distance are unconstrained.
 */
inline OracleReport optimal_selection_lp(const PseudometricSpace& space, const std::vector<AffineSubspace>& flats,
                                         const Tolerances& tol = {}) {
  const auto start = std::chrono::steady_clock::now();
  const int nv = space.size();
  require(static_cast<int>(flats.size()) == nv, "optimal_selection_lp: one flat per point required");
  OracleReport rep;
  if (nv == 0) return rep;
  const int n = flats.front().ambient_dim();
  std::vector<int> offset(nv + 1, 0);
  for (int v = 0; v < nv; ++v) {
    require(flats[v].ambient_dim() == n, "optimal_selection_lp: flats in different dimensions");
    offset[v + 1] = offset[v] + flats[v].dim();
  }
  const int lam = offset[nv];
  LinearProgram lp(lam + 1);
  lp.objective[lam] = 1.0;
  lp.nonnegative.assign(lam + 1, false);
  lp.nonnegative[lam] = true;
  for (int v = 0; v < nv; ++v)
    for (int w = v + 1; w < nv; ++w) {
      const double d = space(v, w);
      if (is_inf(d)) continue;
      for (int j = 0; j < n; ++j) {
        Vector row = Vector::Zero(lam + 1);
        for (int c = 0; c < flats[v].dim(); ++c) row[offset[v] + c] = flats[v].basis(j, c);
        for (int c = 0; c < flats[w].dim(); ++c) row[offset[w] + c] -= flats[w].basis(j, c);
        const double gap = flats[w].base[j] - flats[v].base[j];
        Vector up = row, down = -row;
        up[lam] = -d;
        down[lam] = -d;
        lp.add_le(up, gap);
        lp.add_le(down, -gap);
      }
    }
  const LpResult r = solve_lp(lp, tol);
  ensure(r.status != LpStatus::kUnbounded, "optimal_selection_lp: LP unbounded");
  if (r.status == LpStatus::kInfeasible) {
    rep.lambda_star = kInf;
  } else {
    rep.lambda_star = std::max(0.0, r.value);
    for (int v = 0; v < nv; ++v)
      rep.witness.push_back(flats[v].at(r.x.segment(offset[v], flats[v].dim())));
  }
  rep.wall_ms = detail::elapsed_ms(start);
  return rep;
}

/**
 * Maximum of the optimal selection constants over admissible subsets of
 * size <= 2^(k+1), with rho restricted to each subset.
 */
inline OracleReport finiteness_check(const AffineMap& am, const Tolerances& tol = {}) {
  const auto start = std::chrono::steady_clock::now();
  am.graph.validate_shape();
  require(static_cast<int>(am.flats.size()) == am.graph.num_vertices, "finiteness_check: one flat per vertex");
  require(am.k >= 0 && am.k < 20, "finiteness_check: k out of range");
  const int max_size = 1 << (am.k + 1);
  require(detail::count_subsets(am.graph.num_vertices, max_size) <= kMaxOracleSubsets,
          "finiteness_check: more than 100000 candidate subsets; instance too large");
  OracleReport rep;
  for_each_admissible_subset(am.graph, max_size, [&](const std::vector<int>& w) {
    const int m = static_cast<int>(w.size());
    Matrix d(m, m);
    std::vector<AffineSubspace> sub;
    for (int a = 0; a < m; ++a) {
      sub.push_back(am.flats[w[a]]);
      for (int b = 0; b < m; ++b) d(a, b) = am.graph.rho(w[a], w[b]);
    }
    const double lambda = optimal_selection_lp(PseudometricSpace(d), sub, tol).lambda_star;
    rep.subset_results.push_back({w, lambda});
    if (lambda > rep.lambda_star || rep.worst_subset.empty()) {
      rep.lambda_star = std::max(rep.lambda_star, lambda);
      rep.worst_subset = w;
    }
  });
  rep.wall_ms = detail::elapsed_ms(start);
  return rep;
}

/** Minimum over gradients of the jet norm on Y, by one epigraph LP. */
inline double minimal_jet_norm(const std::vector<Vector>& pts, const Vector& values, const Modulus& omega,
                               const Tolerances& tol = {}) {
  const int m = static_cast<int>(pts.size());
  if (m == 0) return 0.0;
  const int n = static_cast<int>(pts.front().size());
  const int gsz = m * n, s = gsz, tay = gsz + 1, hol = gsz + 2;
  LinearProgram lp(gsz + 3);
  lp.nonnegative.assign(gsz + 3, false);
  lp.nonnegative[s] = lp.nonnegative[tay] = lp.nonnegative[hol] = true;
  lp.objective[s] = lp.objective[tay] = lp.objective[hol] = 1.0;
  for (int i = 0; i < gsz; ++i) {
    Vector row = Vector::Zero(gsz + 3);
    row[i] = 1.0;
    row[s] = -1.0;
    lp.add_le(row, 0.0);
    row[i] = -1.0;
    lp.add_le(row, 0.0);
  }
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y) {
      if (x == y) continue;
      const Vector d = pts[x] - pts[y];
      const double t = max_norm(d), wt = omega(t);
      const double df = values[x] - values[y];
      // |df - <g_y, d>| <= tay t omega(t)
      Vector row = Vector::Zero(gsz + 3);
      row.segment(y * n, n) = d;
      row[tay] = -t * wt;
      lp.add_le(row, df);
      row.segment(y * n, n) = -d;
      lp.add_le(row, -df);
      if (x < y) {
        for (int j = 0; j < n; ++j) {
          Vector h = Vector::Zero(gsz + 3);
          h[x * n + j] = 1.0;
          h[y * n + j] = -1.0;
          h[hol] = -wt;
          lp.add_le(h, 0.0);
          h[x * n + j] = -1.0;
          h[y * n + j] = 1.0;
          lp.add_le(h, 0.0);
        }
      }
    }
  const LpResult r = solve_lp(lp, tol);
  ensure(r.status == LpStatus::kOptimal, "minimal_jet_norm: LP not optimal");
  return values.cwiseAbs().maxCoeff() + std::max(0.0, r.value);
}

/** Max over Y subset of X with |Y| <= max_card of the minimal jet norm on Y. */
inline OracleReport jet_finiteness_check(const SampledFunction& sf, int max_card, const Tolerances& tol = {}) {
  const auto start = std::chrono::steady_clock::now();
  require(max_card >= 1, "jet_finiteness_check: max_card must be positive");
  detail::validate_points(sf.points, sf.values, "SampledFunction");
  const Modulus omega = normalize_modulus(sf.omega);
  const int np = sf.size();
  require(detail::count_subsets(np, max_card) <= kMaxOracleSubsets,
          "jet_finiteness_check: more than 100000 candidate subsets; instance too large");
  WeightedGraph complete;
  complete.num_vertices = np;
  complete.rho = PseudometricSpace(Matrix::Zero(np, np));
  for (int a = 0; a < np; ++a)
    for (int b = a + 1; b < np; ++b) complete.edges.push_back({a, b, 0.0});
  OracleReport rep;
  for_each_admissible_subset(complete, max_card, [&](const std::vector<int>& y) {
    std::vector<Vector> pts;
    Vector vals(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
      pts.push_back(sf.points[y[i]]);
      vals[static_cast<Eigen::Index>(i)] = sf.values[y[i]];
    }
    const double v = minimal_jet_norm(pts, vals, omega, tol);
    rep.subset_results.push_back({y, v});
    if (v > rep.lambda_star || rep.worst_subset.empty()) {
      rep.lambda_star = std::max(rep.lambda_star, v);
      rep.worst_subset = y;
    }
  });
  rep.wall_ms = detail::elapsed_ms(start);
  return rep;
}

/**
 * Convex envelope of h at w from a grid on the box: min sum lambda_i h(x_i)
 * over grid points with sum lambda_i x_i = w, sum lambda_i = 1, lambda >= 0.
 * Solved through its dual, max a.w + b subject to a.x_i + b <= h(x_i), by
 * adding the most violated grid constraint until none is violated; the box
 * corners seed the cut set so every restricted dual is bounded.
 */
inline double brute_force_envelope(const QuadraticFamily& fam, const Vector& w, const Cube& box, int resolution,
                                   const Tolerances& tol = {}) {
  fam.validate();
  require(box.bounded() && box.radius > 0, "brute_force_envelope: box must be bounded with positive radius");
  require(box.center.size() == fam.dim && w.size() == fam.dim, "brute_force_envelope: dimension mismatch");
  require(resolution >= 1, "brute_force_envelope: resolution must be positive");
  require(box.contains(w, 1e-12 * (1.0 + box.radius)), "brute_force_envelope: query outside the box");
  const int n = fam.dim;
  const int per_axis = resolution + 1;
  const double total = std::pow(static_cast<double>(per_axis), n);
  require(total <= 1e15, "brute_force_envelope: grid too large");
  auto fill = [&](long long i, Vector& x) {
    for (int j = 0; j < n; ++j) {
      const long long idx = i % per_axis;
      i /= per_axis;
      x[j] = box.center[j] - box.radius + 2.0 * box.radius * static_cast<double>(idx) / resolution;
    }
  };

  // Variables (a, b), all free; minimize -(a.w + b).
  LinearProgram lp(n + 1);
  lp.objective.head(n) = -w;
  lp.objective[n] = -1.0;
  std::set<long long> cuts;
  auto add_cut = [&](long long i) {
    Vector x(n);
    fill(i, x);
    Vector row(n + 1);
    row.head(n) = x;
    row[n] = 1.0;
    lp.add_le(row, fam.h(x));
    cuts.insert(i);
  };
  for (int corner = 0; corner < (1 << n); ++corner) {
    long long i = 0, stride = 1;
    for (int j = 0; j < n; ++j, stride *= per_axis)
      if (corner & (1 << j)) i += resolution * stride;
    if (!cuts.count(i)) add_cut(i);
  }
  for (;;) {
    const LpResult r = solve_lp(lp, tol);
    ensure(r.status == LpStatus::kOptimal, "brute_force_envelope: LP not optimal");
    const Vector a = r.x.head(n);
    const double b = r.x[n];
    // Each piece minus a.x is c|x|^2 + (beta - a).x + gamma, separable with
    // equal weights, so its grid minimizer rounds the continuous one per axis.
    long long worst = -1;
    double violation = 0.0;
    Vector x(n);
    for (const auto& piece : fam.pieces) {
      long long i = 0, stride = 1;
      for (int j = 0; j < n; ++j, stride *= per_axis) {
        const double target = (a[j] - piece.beta[j]) / (2.0 * fam.c);
        const double pos = (target - (box.center[j] - box.radius)) * resolution / (2.0 * box.radius);
        i += static_cast<long long>(std::clamp(std::round(pos), 0.0, static_cast<double>(resolution))) * stride;
      }
      fill(i, x);
      const double hx = fam.h(x);
      const double ax = a.dot(x);
      // Violations within rounding of the terms do not count.
      const double v = ax + b - hx - 64 * std::numeric_limits<double>::epsilon() * (std::abs(ax) + std::abs(b) + std::abs(hx));
      if (v > violation) {
        violation = v;
        worst = i;
      }
    }
    if (worst < 0 || cuts.count(worst)) return -r.value;
    add_cut(worst);
  }
}

}  // namespace lipsel
