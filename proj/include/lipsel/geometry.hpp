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

#pragma once

#include <string>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/solvers.hpp"

namespace lipsel {

/** Affine flat base + span(basis) with orthonormal basis columns. */
struct AffineSubspace {
  Vector base;
  Matrix basis;  // ambient x dim

  AffineSubspace() = default;
  AffineSubspace(Vector b, Matrix dirs) : base(std::move(b)), basis(std::move(dirs)) {
    require(basis.rows() == base.size(), "AffineSubspace: basis rows differ from base dimension");
  }

  static AffineSubspace point(Vector p) {
    const Eigen::Index n = p.size();
    return AffineSubspace(std::move(p), Matrix(n, 0));
  }
  static AffineSubspace whole_space(int n) {
    return AffineSubspace(Vector::Zero(n), Matrix::Identity(n, n));
  }

  int ambient_dim() const { return static_cast<int>(base.size()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  Vector at(const Vector& t) const { return base + basis * t; }

  /** Coordinates of the orthogonal projection of x. */
  Vector coordinates(const Vector& x) const { return basis.transpose() * (x - base); }

  Vector project(const Vector& x) const { return base + basis * coordinates(x); }

  /** Max-norm distance from x to its orthogonal projection. */
  double residual(const Vector& x) const { return max_dist(x, project(x)); }

  /** Max deviation of basis^T basis from the identity. */
  double orthonormality_defect() const {
    if (dim() == 0) return 0.0;
    return (basis.transpose() * basis - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

  /** Same flat, rebased at a point of it. */
  AffineSubspace through(const Vector& p) const { return AffineSubspace(p, basis); }
};

/** Max-norm ball Q(center, radius); radius may be +inf. */
struct Cube {
  Vector center;
  double radius = 0.0;

  bool bounded() const { return std::isfinite(radius); }
  bool contains(const Vector& x, double tol = 0.0) const {
    return !bounded() || max_dist(x, center) <= radius + tol;
  }
};

/**
 * Orthonormal basis of the column span of `dirs` by modified Gram-Schmidt
 * with reorthogonalization. Columns whose remainder falls below
 * `rank_tol` times the largest column norm are dropped.
 */
inline Matrix orthonormalize(const Matrix& dirs, double rank_tol = 1e-10) {
  const Eigen::Index n = dirs.rows();
  double scale = 0.0;
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) scale = std::max(scale, dirs.col(j).norm());
  std::vector<Vector> kept;
  if (scale == 0.0) return Matrix(n, 0);
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    Vector v = dirs.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : kept) v -= q.dot(v) * q;
    const double nv = v.norm();
    if (nv <= rank_tol * scale) continue;
    kept.push_back(v / nv);
    if (static_cast<Eigen::Index>(kept.size()) == n) break;
  }
  Matrix out(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
  return out;
}

/** Orthonormal basis of the orthogonal complement of span(dirs). */
inline Matrix orthogonal_complement(const Matrix& dirs, double rank_tol = 1e-10) {
  const Eigen::Index n = dirs.rows();
  Matrix q = orthonormalize(dirs, rank_tol);
  Matrix all(n, q.cols() + n);
  all << q, Matrix::Identity(n, n);
  Matrix full = orthonormalize(all, rank_tol);
  return full.rightCols(full.cols() - q.cols());
}

/** Smallest affine flat containing the points. */
inline AffineSubspace affine_from_points(const std::vector<Vector>& points, double rank_tol = 1e-10) {
  require(!points.empty(), "affine_from_points: empty point list");
  const Eigen::Index n = points.front().size();
  Matrix diffs(n, static_cast<Eigen::Index>(points.size()) - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    require(points[i].size() == n, "affine_from_points: mixed dimensions");
    diffs.col(static_cast<Eigen::Index>(i) - 1) = points[i] - points[0];
  }
  return AffineSubspace(points[0], orthonormalize(diffs, rank_tol));
}

inline Vector project_orthogonal(const AffineSubspace& a, const Vector& x) {
  require(x.size() == a.ambient_dim(), "project_orthogonal: dimension mismatch");
  return a.project(x);
}

/** True when span(inner) is contained in span(outer); both orthonormal. */
inline bool direction_contained(const Matrix& inner, const Matrix& outer, double tol = 1e-9) {
  if (inner.cols() == 0) return true;
  if (outer.cols() == 0) return false;
  const Matrix rest = inner - outer * (outer.transpose() * inner);
  return rest.cwiseAbs().maxCoeff() <= tol;
}

/** Max-norm distance from x to the flat (an LP). */
inline double distance_inf(const AffineSubspace& a, const Vector& x, const Tolerances& tol = {}) {
  const int d = a.dim();
  const int n = a.ambient_dim();
  if (d == 0) return max_dist(a.base, x);
  LinearProgram lp(d + 1);
  lp.objective[d] = 1.0;
  for (int j = 0; j < n; ++j) {
    Vector row = Vector::Zero(d + 1);
    row.head(d) = a.basis.row(j).transpose();
    row[d] = -1.0;
    lp.add_le(row, x[j] - a.base[j]);
    row.head(d) = -row.head(d);
    lp.add_le(row, a.base[j] - x[j]);
  }
  const LpResult res = solve_lp(lp, tol);
  ensure(res.status == LpStatus::kOptimal, "distance_inf: LP not optimal");
  return std::max(res.value, 0.0);
}

struct NearestPair {
  Vector x1;
  Vector x2;
  double distance = 0.0;
};

/**
 * Closest pair x1 in a1, x2 in a2 in the max norm. Ties are resolved in
 * stages, each one LP over the survivors of the previous stage: least
 * l1-length of x1 - x2, then least max-norm of (x1, x2), then the
 * lexicographically smallest (x1, x2).
 */
inline NearestPair nearest_pair(const AffineSubspace& a1, const AffineSubspace& a2,
                                const Tolerances& tol = {}) {
  const int n = a1.ambient_dim();
  require(a2.ambient_dim() == n, "nearest_pair: ambient dimensions differ");
  const int d1 = a1.dim();
  const int d2 = a2.dim();
  if (d1 == 0 && d2 == 0) return {a1.base, a2.base, max_dist(a1.base, a2.base)};

  // Variables: t1 (d1), t2 (d2), d, mu, e (n, bounds on |x1 - x2|_j).
  const int nt = d1 + d2;
  const int id = nt, imu = nt + 1, ie = nt + 2;
  const int nv = nt + 2 + n;
  auto coord_row = [&](int which, int j) {
    Vector row = Vector::Zero(nv);
    if (which == 0)
      row.segment(0, d1) = a1.basis.row(j).transpose();
    else
      row.segment(d1, d2) = a2.basis.row(j).transpose();
    return row;
  };
  LinearProgram lp(nv);
  for (int j = 0; j < n; ++j) {
    const Vector diff = coord_row(0, j) - coord_row(1, j);
    const double delta = a1.base[j] - a2.base[j];
    for (int bound : {id, ie + j}) {
      Vector up = diff, down = -diff;
      up[bound] = -1.0;
      down[bound] = -1.0;
      lp.add_le(up, -delta);
      lp.add_le(down, delta);
    }
    for (int w = 0; w < 2; ++w) {
      const double b = w == 0 ? a1.base[j] : a2.base[j];
      Vector r = coord_row(w, j);
      r[imu] = -1.0;
      lp.add_le(r, -b);
      Vector s = -coord_row(w, j);
      s[imu] = -1.0;
      lp.add_le(s, b);
    }
  }
  // Each stage fixes its optimum up to a small slack. When the fixed rows
  // leave the next LP numerically infeasible, the latest one is relaxed.
  LpResult res;
  double last_value = 0.0;
  auto stage = [&](const Vector& objective) {
    lp.objective = objective;
    res = solve_lp(lp, tol);
    for (double slack = 1e-8; res.status == LpStatus::kInfeasible && slack <= 1e-6 && lp.constraints.size() > 8u * n;
         slack *= 10) {
      lp.constraints.back().rhs = last_value + slack * (1.0 + std::abs(last_value));
      res = solve_lp(lp, tol);
    }
    ensure(res.status == LpStatus::kOptimal, std::string("nearest_pair: refinement LP ") + to_string(res.status));
    last_value = res.value;
    lp.add_le(objective, res.value + 1e-10 * (1.0 + std::abs(res.value)));
  };

  Vector obj = Vector::Zero(nv);
  obj[id] = 1.0;
  stage(obj);
  obj.setZero();
  obj.segment(ie, n).setOnes();
  stage(obj);
  obj.setZero();
  obj[imu] = 1.0;
  stage(obj);
  for (int w = 0; w < 2; ++w) {
    if ((w == 0 ? d1 : d2) == 0) continue;
    for (int j = 0; j < n; ++j) stage(coord_row(w, j));
  }
  const Vector t1 = res.x.segment(0, d1);
  const Vector t2 = res.x.segment(d1, d2);
  NearestPair out{a1.at(t1), a2.at(t2), 0.0};
  out.distance = max_dist(out.x1, out.x2);
  return out;
}

/** One pair (L, r) of a decomposition. */
struct FacePair {
  AffineSubspace flat;
  double radius = 0.0;
};

/**
 * U1 intersected with the slab x1 + W2 + Q(2 rho), written as the
 * intersection over i of U1 and L_i + Q(r_i).
 */
struct Decomposition {
  Vector anchor;
  std::vector<FacePair> pairs;
  bool parallel_full_dim = false;
};

/**
 * Decomposes P = U1 cap (x1 + W2 + Q(2 rho)) where W2 = span(u2_dirs).
 * `max_dim` is the largest flat dimension allowed at the current level: a
 * flat of that dimension parallel to W2 yields the single pair ({x1}, inf).
 */
inline Decomposition decompose_intersection(const AffineSubspace& u1, const Matrix& u2_dirs,
                                            const Vector& x1, double rho, int max_dim,
                                            const Tolerances& tol = {}) {
  const int n = u1.ambient_dim();
  const int d1 = u1.dim();
  const int d2 = static_cast<int>(u2_dirs.cols());
  require(u2_dirs.rows() == n && x1.size() == n, "decompose_intersection: dimension mismatch");
  require(rho >= 0, "decompose_intersection: negative distance");
  require(u1.residual(x1) <= 10 * tol.feasibility * (1.0 + max_norm(x1)),
          "decompose_intersection: anchor is not on U1");

  Decomposition out;
  out.anchor = x1;
  if (d1 == 0) {
    out.pairs.push_back({AffineSubspace::point(x1), 0.0});
    return out;
  }
  auto containment = [&]() {
    if (d1 < max_dim) {
      out.pairs.push_back({u1.through(x1), 0.0});
    } else {
      out.pairs.push_back({AffineSubspace::point(x1), kInf});
      out.parallel_full_dim = true;
    }
    return out;
  };
  // An infinite distance puts no constraint on U1.
  if (!std::isfinite(rho) || direction_contained(u1.basis, u2_dirs)) return containment();

  InequalitySystem slab(d1 + d2, true);
  for (int j = 0; j < n; ++j) {
    Vector row(d1 + d2);
    row.head(d1) = u1.basis.row(j).transpose();
    row.tail(d2) = -u2_dirs.row(j).transpose();
    slab.add_pair(row, 2.0 * rho);
  }
  std::vector<int> elim(d2);
  for (int k = 0; k < d2; ++k) elim[k] = d1 + k;
  const InequalitySystem cut = remove_redundant(fm_eliminate(slab, elim, tol), tol);
  ensure(!cut.is_empty_marker(), "decompose_intersection: empty slab section");
  if (cut.rows.empty()) return containment();

  for (std::size_t g = 0; g < cut.rows.size(); g += 2) {
    const Vector& a = cut.rows[g];
    const double c = cut.rhs[g];
    // h(a) = max <a, t> over ||B1 t||_inf <= 1.
    LinearProgram lp(d1);
    lp.objective = -a;
    for (int j = 0; j < n; ++j) {
      const Vector row = u1.basis.row(j).transpose();
      lp.add_le(row, 1.0);
      lp.add_le(-row, 1.0);
    }
    const LpResult hres = solve_lp(lp, tol);
    ensure(hres.status == LpStatus::kOptimal && -hres.value > 0,
           "decompose_intersection: support LP failed");
    const double h = -hres.value;
    Matrix normal(d1, 1);
    normal.col(0) = a;
    const Matrix kernel = orthogonal_complement(normal, tol.rank);
    out.pairs.push_back({AffineSubspace(x1, u1.basis * kernel), c / h});
  }
  return out;
}

}  // namespace lipsel
