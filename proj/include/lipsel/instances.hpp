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

// Seeded random instance generators shared by the tests and the bench suites.

#pragma once

#include <algorithm>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/linsys.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/random.hpp"
#include "lipsel/selection.hpp"

namespace lipsel::instances {

struct SelectionParams {
  int n = 2;
  int k = 1;
  int vertices = 4;
  bool sparse = false;
  /// Planted instances have a 1-Lipschitz selection by construction.
  bool planted = true;
};

/** Euclidean distances between random points of R^dim, times scale. */
inline Matrix random_metric(Rng& rng, int count, int dim, double scale) {
  std::vector<Vector> q;
  for (int i = 0; i < count; ++i) q.push_back(rng.uniform_vector(dim, -1, 1));
  Matrix d(count, count);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) d(i, j) = scale * (q[i] - q[j]).norm();
  return d;
}

/** Random spanning tree plus extra edges; weights are the given distances. */
inline WeightedGraph random_graph(Rng& rng, const PseudometricSpace& rho, bool sparse) {
  if (!sparse) return full_graph(rho);
  WeightedGraph g;
  g.num_vertices = rho.size();
  g.rho = rho;
  const int nv = rho.size();
  std::vector<char> joined(static_cast<std::size_t>(nv) * nv, 0);
  for (int v = 1; v < nv; ++v) {
    const int u = rng.integer(0, v - 1);
    joined[u * nv + v] = 1;
  }
  for (int u = 0; u < nv; ++u)
    for (int v = u + 1; v < nv; ++v)
      if (!joined[u * nv + v] && rng.coin(0.3)) joined[u * nv + v] = 1;
  for (int u = 0; u < nv; ++u)
    for (int v = u + 1; v < nv; ++v)
      if (joined[u * nv + v]) g.edges.push_back({u, v, rho(u, v)});
  g.factor = std::max(1.0, comparison_factor(path_metric(g), rho));
  return g;
}

/**
 * Affine map with flats of dimension <= k. Planted instances pass each
 * flat through a point p_v with |p_v - p_w|_inf <= rho(v, w).
 */
inline AffineMap random_affine_map(Rng& rng, const SelectionParams& p) {
  const int nv = p.vertices;
  std::vector<Vector> pts;
  for (int v = 0; v < nv; ++v) pts.push_back(rng.uniform_vector(p.n, -1, 1));
  Matrix d = random_metric(rng, nv, rng.integer(1, 3), rng.uniform(0.2, 1.5));
  if (p.planted) {
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) d(i, j) = std::max(d(i, j), max_dist(pts[i], pts[j]));
  }
  AffineMap am;
  am.k = p.k;
  am.graph = random_graph(rng, PseudometricSpace(d), p.sparse);
  for (int v = 0; v < nv; ++v) {
    const int dim = rng.integer(0, std::min(p.k, p.n));
    Matrix basis = rng.orthonormal(p.n, dim);
    // Occasionally reuse a direction space so that parallel flats occur.
    if (v > 0 && dim > 0 && rng.coin(0.2) && am.flats[v - 1].dim() == dim) basis = am.flats[v - 1].basis;
    am.flats.emplace_back(pts[v], basis);
  }
  return am;
}

struct CubeParams {
  int n = 2;
  int points = 6;
};

/**
 * Cube map satisfying the two-point hypothesis: cubes are grown around a
 * 1-Lipschitz point set, with radii mixing 0, finite and inf.
 */
inline CubeMap random_cube_map(Rng& rng, const CubeParams& p) {
  std::vector<Vector> pts;
  for (int i = 0; i < p.points; ++i) pts.push_back(rng.uniform_vector(p.n, -2, 2));
  Matrix d = random_metric(rng, p.points, rng.integer(1, 3), rng.uniform(0.1, 2.0));
  for (int i = 0; i < p.points; ++i)
    for (int j = 0; j < p.points; ++j) d(i, j) = std::max(d(i, j), max_dist(pts[i], pts[j]));
  CubeMap cm;
  cm.space = PseudometricSpace(d);
  for (int i = 0; i < p.points; ++i) {
    const double u = rng.uniform();
    const double r = u < 0.25 ? 0.0 : (u < 0.4 ? kInf : rng.uniform(0.0, 1.5));
    // Shift the centre inside the cube so the planted point stays covered.
    Vector c = pts[i];
    if (std::isfinite(r) && r > 0)
      for (int j = 0; j < p.n; ++j) c[j] += rng.uniform(-r, r);
    cm.cubes.push_back({c, r});
  }
  return cm;
}

struct SystemParams {
  int n = 2;
  int unknowns = 2;
  int rows = 2;
  int points = 6;
};

/**
 * b(x) = A(x) f*(x) with f* linear on R^n. A(x) has generic rank, dropping
 * to a random lower rank at one point in five.
 */
inline SampledSystem random_planted_system(Rng& rng, const SystemParams& p, std::vector<Vector>* truth = nullptr) {
  SampledSystem s;
  const Matrix lin = Matrix::NullaryExpr(p.unknowns, p.n, [&] { return rng.uniform(-1, 1); });
  for (int i = 0; i < p.points; ++i) {
    const Vector x = rng.uniform_vector(p.n, -1, 1);
    const Vector f = lin * x;
    const int full = std::min(p.rows, p.unknowns);
    const int rank = rng.coin(0.2) ? rng.integer(0, full) : full;
    const Matrix left = Matrix::NullaryExpr(p.rows, rank, [&] { return rng.uniform(-1, 1); });
    const Matrix right = Matrix::NullaryExpr(rank, p.unknowns, [&] { return rng.uniform(-1, 1); });
    s.points.push_back(x);
    s.a.push_back(left * right);
    s.b.push_back(s.a.back() * f);
    if (truth) truth->push_back(f);
  }
  return s;
}

}  // namespace lipsel::instances
