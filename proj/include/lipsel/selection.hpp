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

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/metricspace.hpp"

namespace lipsel {

/** A cube per point of a pseudometric space. */
struct CubeMap {
  PseudometricSpace space;
  std::vector<Cube> cubes;
};

/** An affine flat of dimension <= k per vertex of a weighted graph. */
struct AffineMap {
  WeightedGraph graph;
  std::vector<AffineSubspace> flats;
  int k = 0;

  int ambient_dim() const { return flats.empty() ? 0 : flats.front().ambient_dim(); }
};

/** Anchors and face pairs computed for one directed edge of the top level. */
struct EdgeRecord {
  int v1 = 0;
  int v2 = 0;
  Vector x1;
  Vector x2;
  double anchor_distance = 0.0;
  double rho = 0.0;
  std::vector<double> radii;
  std::vector<int> pair_dims;
  bool parallel = false;
};

/** Summary of one recursion level; index 0 is the input level. */
struct StageRecord {
  int depth = 0;
  int level_k = 0;
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t doubled = 0;   ///< size of the doubled space V-bar
  std::size_t parallel = 0;  ///< entries of V-bar with r = inf
  std::size_t max_pairs = 0; ///< largest number of face pairs on one edge
  double stage_constant = 1.0;
  double lambda = 0.0;
  double seminorm = 0.0;     ///< seminorm of this level's selection
  bool hub_graph = false;    ///< doubled level carried the hub graph
};

struct SelectionDiagnostics {
  int k_requested = 0;
  int k_effective = 0;
  double lipschitz_bound = 1.0;
  std::vector<StageRecord> stages;
  std::vector<EdgeRecord> edges;
  std::vector<Vector> cube_points;  ///< cube-stage selection per vertex
  std::vector<double> min_radius;   ///< least face radius over entries at v
  bool has_cube_stage = false;
  double stage_constant = 1.0;
  double lambda = 0.0;
  bool factorization_checked = false;
  double factorization_defect = 0.0;
  /// vertices whose flat is the whole space, filled in after the recursion
  std::vector<int> free_vertices;
  /// every flat contains one point, returned as a constant selection
  bool common_point = false;
};

struct Selection {
  std::vector<Vector> points;
  double seminorm = 0.0;
  SelectionDiagnostics diagnostics;
};

struct SelectOptions {
  /// Run the construction on lipschitz_bound * rho; the reported seminorm
  /// is always measured against rho itself.
  double lipschitz_bound = 1.0;
  int threads = 1;
  Tolerances tol;
  /// Relative slack accepted on anchor distances and cube hypotheses.
  double hypothesis_slack = 1e-7;
  /// Largest doubled space on which the cube stage is re-run point by point
  /// to check that it factors through the first edge vertex.
  std::size_t factorization_check_limit = 4096;
  /// Doubled levels with more ordered pairs than this carry the hub graph
  /// (path metric within a factor 3 of rho-bar) instead of the full graph.
  std::size_t complete_graph_limit = 4096;
};

/** max over pairs of |f(v) - f(w)|_inf / rho(v, w), 0/0 = 0, x/0 = inf. */
template <typename DistFn>
double lipschitz_seminorm(const std::vector<Vector>& points, DistFn&& dist, double zero_tol = 1e-12) {
  double best = 0.0;
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::max(best, lipschitz_ratio(max_dist(points[i], points[j]), dist(i, j), zero_tol));
  return best;
}

inline double lipschitz_seminorm(const std::vector<Vector>& points, const PseudometricSpace& space,
                                 double zero_tol = 1e-12) {
  return lipschitz_seminorm(points, [&](int i, int j) { return space(i, j); }, zero_tol);
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double zero_tolerance(const std::vector<Vector>& points) {
  double s = 1.0;
  for (const auto& p : points) s = std::max(s, max_norm(p));
  return 1e-9 * s;
}

/**
 * Coordinatewise interval selection: per coordinate, on the bounded points
 * f(m) = min over bounded m' of hi(m') + rho(m, m'), extended to the
 * unbounded points by f(m) = min over bounded m' of f(m') + rho(m, m').
 * Throws HypothesisFailure (naming the pair, through `name`) when two
 * intervals are further apart than their distance.
 */
template <typename DistFn, typename NameFn>
std::vector<Vector> interval_select(const std::vector<Vector>& lo, const std::vector<Vector>& hi,
                                    const std::vector<char>& bounded, DistFn&& dist, double slack,
                                    NameFn&& name, const std::string& context) {
  const int m = static_cast<int>(lo.size());
  if (m == 0) return {};
  const Eigen::Index n = lo.front().size();
  std::vector<int> fixed;
  for (int i = 0; i < m; ++i)
    if (bounded[i]) fixed.push_back(i);

  // Two-point hypothesis on bounded pairs.
  for (std::size_t a = 0; a < fixed.size(); ++a) {
    const int i = fixed[a];
    for (std::size_t b = a + 1; b < fixed.size(); ++b) {
      const int j = fixed[b];
      double gap = 0.0;
      for (Eigen::Index c = 0; c < n; ++c)
        gap = std::max({gap, lo[i][c] - hi[j][c], lo[j][c] - hi[i][c]});
      const double d = dist(i, j);
      const double scale = 1.0 + std::max(max_norm(lo[i]), max_norm(lo[j]));
      if (gap > d + slack * (scale + (std::isfinite(d) ? d : 0.0))) {
        throw HypothesisFailure(context + ": no 1-Lipschitz selection on the pair (" + std::to_string(i) + ", " +
                                    std::to_string(j) + "): interval gap " + std::to_string(gap) +
                                    " exceeds distance " + std::to_string(d),
                                name(i, j));
      }
    }
  }

  std::vector<Vector> out(m, Vector::Zero(n));
  if (fixed.empty()) return out;
  for (int i : fixed) {
    for (Eigen::Index c = 0; c < n; ++c) {
      double best = kInf;
      for (int j : fixed) best = std::min(best, hi[j][c] + (j == i ? 0.0 : dist(i, j)));
      // The hypothesis gives best >= lo up to slack; clamp the slack away.
      out[i][c] = std::max(best, lo[i][c]);
    }
  }
  for (int i = 0; i < m; ++i) {
    if (bounded[i]) continue;
    for (Eigen::Index c = 0; c < n; ++c) {
      double best = kInf;
      for (int j : fixed) {
        const double d = dist(i, j);
        if (std::isfinite(d)) best = std::min(best, out[j][c] + d);
      }
      out[i][c] = std::isfinite(best) ? best : 0.0;
    }
  }
  return out;
}

// One level of the recursion. The input level holds an explicit matrix;
// doubled levels store the parent vertex (group) and face radius of each
// point, with distance parent(g_a, g_b) + r_a + r_b between distinct points.
struct Level {
  int size = 0;
  Matrix dense;
  bool has_dense = false;
  const Level* parent = nullptr;
  std::vector<int> group;
  std::vector<double> radius;
  std::vector<std::pair<int, int>> edges;  // directed; full graph when empty and all_pairs
  bool all_pairs = false;

  double dist(int i, int j) const {
    if (i == j) return 0.0;
    if (has_dense) return dense(i, j);
    return parent->dist(group[i], group[j]) + radius[i] + radius[j];
  }

  int top_vertex(int i) const {
    const Level* lv = this;
    while (lv->parent != nullptr) {
      i = lv->group[i];
      lv = lv->parent;
    }
    return i;
  }

  void densify() {
    dense.resize(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) dense(i, j) = dist(i, j);
    has_dense = true;
  }
};

// Seminorm on a doubled level, grouped by parent vertex. Group pairs are
// visited in decreasing order of a bounding-box upper bound, stopping once
// the bound cannot beat the running maximum.
inline double grouped_seminorm(const Level& level, const std::vector<Vector>& pts, double zero_tol) {
  const int groups = level.parent->size;
  const Eigen::Index n = pts.empty() ? 0 : pts.front().size();
  std::vector<std::vector<int>> members(groups);
  for (int i = 0; i < level.size; ++i) members[level.group[i]].push_back(i);
  std::vector<Vector> lo(groups, Vector::Constant(n, kInf)), hi(groups, Vector::Constant(n, -kInf));
  std::vector<double> rmin(groups, kInf);
  for (int i = 0; i < level.size; ++i) {
    const int g = level.group[i];
    lo[g] = lo[g].cwiseMin(pts[i]);
    hi[g] = hi[g].cwiseMax(pts[i]);
    rmin[g] = std::min(rmin[g], level.radius[i]);
  }
  double best = 0.0;
  for (int g = 0; g < groups; ++g) {
    const auto& mem = members[g];
    for (std::size_t a = 0; a < mem.size(); ++a)
      for (std::size_t b = a + 1; b < mem.size(); ++b)
        best = std::max(best, lipschitz_ratio(max_dist(pts[mem[a]], pts[mem[b]]),
                                              level.radius[mem[a]] + level.radius[mem[b]], zero_tol));
  }
  struct Bound {
    double ub;
    int g, h;
  };
  std::vector<Bound> bounds;
  for (int g = 0; g < groups; ++g) {
    if (members[g].empty()) continue;
    for (int h = g + 1; h < groups; ++h) {
      if (members[h].empty()) continue;
      double spread = 0.0;
      for (Eigen::Index c = 0; c < n; ++c) spread = std::max({spread, hi[g][c] - lo[h][c], hi[h][c] - lo[g][c]});
      const double den = level.parent->dist(g, h) + rmin[g] + rmin[h];
      bounds.push_back({lipschitz_ratio(spread, den, zero_tol), g, h});
    }
  }
  std::sort(bounds.begin(), bounds.end(), [](const Bound& a, const Bound& b) {
    return a.ub > b.ub || (a.ub == b.ub && (a.g < b.g || (a.g == b.g && a.h < b.h)));
  });
  for (const auto& bd : bounds) {
    if (bd.ub <= best) break;
    const double base = level.parent->dist(bd.g, bd.h);
    for (int a : members[bd.g])
      for (int b : members[bd.h])
        best = std::max(best, lipschitz_ratio(max_dist(pts[a], pts[b]),
                                              base + level.radius[a] + level.radius[b], zero_tol));
  }
  return best;
}

inline double level_seminorm(const Level& level, const std::vector<Vector>& pts) {
  const double zt = zero_tolerance(pts);
  if (level.has_dense || level.size <= 2048 || level.parent == nullptr)
    return lipschitz_seminorm(pts, [&](int i, int j) { return level.dist(i, j); }, zt);
  return grouped_seminorm(level, pts, zt);
}

// Each group's hub is its member of least radius. Members are joined to their
// hub and hubs to each other; a path a, hub(a), hub(b), b has length at most
// 3 rho-bar(a, b) because hub radii are minimal.
inline std::vector<std::pair<int, int>> hub_edges(const Level& level) {
  const int groups = level.parent->size;
  std::vector<int> hub(groups, -1);
  for (int i = 0; i < level.size; ++i) {
    int& h = hub[level.group[i]];
    if (h < 0 || level.radius[i] < level.radius[h]) h = i;
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < level.size; ++i) {
    const int h = hub[level.group[i]];
    if (h == i) continue;
    edges.emplace_back(i, h);
    edges.emplace_back(h, i);
  }
  for (int g = 0; g < groups; ++g)
    for (int f = 0; f < groups; ++f)
      if (g != f && hub[g] >= 0 && hub[f] >= 0) edges.emplace_back(hub[g], hub[f]);
  std::sort(edges.begin(), edges.end());
  return edges;
}

struct Entry {
  int edge = 0;
  int v1 = 0;
  FacePair face;
  bool parallel = false;
};

class AffineSelector {
 public:
  AffineSelector(const SelectOptions& opt, SelectionDiagnostics& diag) : opt_(opt), diag_(diag) {}

  std::vector<Vector> run(const Level& level, const std::vector<AffineSubspace>& flats, int depth) {
    int k = 0;
    for (const auto& f : flats) k = std::max(k, f.dim());
    StageRecord rec;
    rec.depth = depth;
    rec.level_k = k;
    rec.vertices = flats.size();
    rec.hub_graph = level.parent != nullptr && !level.all_pairs;
    const std::size_t slot = diag_.stages.size();
    diag_.stages.push_back(rec);

    if (k == 0) {
      std::vector<Vector> pts;
      pts.reserve(flats.size());
      for (const auto& f : flats) pts.push_back(f.base);
      diag_.stages[slot].seminorm = level_seminorm(level, pts);
      return pts;
    }

    // Edge stage: anchors and face pairs, independent per directed edge.
    std::vector<std::pair<int, int>> edges = level.edges;
    if (level.all_pairs) {
      edges.clear();
      for (int a = 0; a < level.size; ++a)
        for (int b = 0; b < level.size; ++b)
          if (a != b) edges.emplace_back(a, b);
    }
    std::vector<NearestPair> anchors(edges.size());
    std::vector<Decomposition> decs(edges.size());
    parallel_for(edges.size(), opt_.threads, [&](std::size_t e) {
      const auto [v1, v2] = edges[e];
      const double rho = level.dist(v1, v2);
      anchors[e] = nearest_pair(flats[v1], flats[v2], opt_.tol);
      const double d = anchors[e].distance;
      const double allowed = rho + opt_.hypothesis_slack * (1.0 + (std::isfinite(rho) ? rho : 0.0));
      if (d > allowed) {
        const int t1 = level.top_vertex(v1), t2 = level.top_vertex(v2);
        throw HypothesisFailure("no selection at edge (" + std::to_string(v1) + ", " + std::to_string(v2) +
                                    ") at recursion depth " + std::to_string(depth) + ": anchor distance " +
                                    std::to_string(d) + " exceeds " + std::to_string(rho),
                                t1 == t2 ? std::vector<int>{t1} : std::vector<int>{t1, t2});
      }
      decs[e] = decompose_intersection(flats[v1], flats[v2].basis, anchors[e].x1, rho, k, opt_.tol);
    });

    std::vector<Entry> entries;
    std::size_t parallel = 0, max_pairs = 0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      max_pairs = std::max(max_pairs, decs[e].pairs.size());
      for (const auto& fp : decs[e].pairs) {
        entries.push_back({static_cast<int>(e), edges[e].first, fp, decs[e].parallel_full_dim});
        if (decs[e].parallel_full_dim) ++parallel;
      }
    }
    diag_.stages[slot].edges = edges.size();
    diag_.stages[slot].doubled = entries.size();
    diag_.stages[slot].parallel = parallel;
    diag_.stages[slot].max_pairs = max_pairs;

    // Recursion on the finite part of the doubled space.
    Level child;
    child.parent = &level;
    std::vector<AffineSubspace> child_flats;
    std::vector<int> child_of(entries.size(), -1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].parallel) continue;
      child_of[i] = child.size++;
      child.group.push_back(entries[i].v1);
      child.radius.push_back(entries[i].face.radius);
      child_flats.push_back(entries[i].face.flat);
    }
    if (child.size > 0 && child.size <= 2048) child.densify();
    const std::size_t ordered = static_cast<std::size_t>(child.size) * static_cast<std::size_t>(std::max(child.size - 1, 0));
    if (ordered <= opt_.complete_graph_limit)
      child.all_pairs = true;
    else
      child.edges = hub_edges(child);
    double c_stage = 1.0;
    std::vector<Vector> child_pts;
    if (child.size > 0) {
      child_pts = run(child, child_flats, depth + 1);
      c_stage = std::max(1.0, diag_.stages[slot + 1].seminorm);
    }
    const double n_amb = static_cast<double>(flats.front().ambient_dim());
    diag_.stages[slot].stage_constant = c_stage;
    diag_.stages[slot].lambda = (1.0 + std::sqrt(n_amb)) * c_stage;

    // f-bar on all of V-bar: the recursive selection, or x1 on parallel entries.
    std::vector<Vector> fbar(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
      fbar[i] = entries[i].parallel ? anchors[entries[i].edge].x1 : child_pts[child_of[i]];

    // Cube stage on the quotient by the first edge vertex: the cubes
    // Q(fbar, C r) of all entries at v intersect to one box per vertex.
    const Eigen::Index n = flats.front().ambient_dim();
    std::vector<Vector> lo(level.size, Vector::Constant(n, -kInf)), hi(level.size, Vector::Constant(n, kInf));
    std::vector<char> bounded(level.size, 0);
    std::vector<double> rmin(level.size, kInf);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const int v = entries[i].v1;
      const double r = entries[i].face.radius;
      rmin[v] = std::min(rmin[v], r);
      if (!std::isfinite(r)) continue;
      bounded[v] = 1;
      lo[v] = lo[v].cwiseMax((fbar[i].array() - c_stage * r).matrix());
      hi[v] = hi[v].cwiseMin((fbar[i].array() + c_stage * r).matrix());
    }
    for (int v = 0; v < level.size; ++v) {
      if (!bounded[v]) continue;
      const double gap = (lo[v] - hi[v]).maxCoeff();
      if (gap > opt_.hypothesis_slack * (1.0 + max_norm(lo[v]))) {
        throw HypothesisFailure("cube stage at depth " + std::to_string(depth) + ": empty intersection at vertex " +
                                    std::to_string(v),
                                {level.top_vertex(v)});
      }
      for (Eigen::Index c = 0; c < n; ++c)
        if (lo[v][c] > hi[v][c]) lo[v][c] = hi[v][c] = 0.5 * (lo[v][c] + hi[v][c]);
    }
    auto hat_dist = [&](int a, int b) { return c_stage * level.dist(a, b); };
    auto top_pair = [&](int a, int b) {
      const int t1 = level.top_vertex(a), t2 = level.top_vertex(b);
      return t1 == t2 ? std::vector<int>{t1} : std::vector<int>{t1, t2};
    };
    const std::vector<Vector> hat =
        interval_select(lo, hi, bounded, hat_dist, opt_.hypothesis_slack, top_pair,
                        "cube stage at depth " + std::to_string(depth));

    if (depth == 0 && entries.size() <= opt_.factorization_check_limit) {
      diag_.factorization_checked = true;
      diag_.factorization_defect = factorization_defect(level, entries, fbar, c_stage, hat, top_pair);
      ensure(diag_.factorization_defect <= 1e-8 * (1.0 + max_scale(hat)),
             "cube stage does not factor through the first edge vertex");
    }

    std::vector<Vector> out(level.size);
    for (int v = 0; v < level.size; ++v) out[v] = flats[v].project(hat[v]);
    diag_.stages[slot].seminorm = level_seminorm(level, out);

    if (depth == 0) {
      diag_.has_cube_stage = true;
      diag_.stage_constant = c_stage;
      diag_.lambda = diag_.stages[slot].lambda;
      diag_.cube_points = hat;
      diag_.min_radius = rmin;
      diag_.edges.clear();
      for (std::size_t e = 0; e < edges.size(); ++e) {
        EdgeRecord er;
        er.v1 = edges[e].first;
        er.v2 = edges[e].second;
        er.x1 = anchors[e].x1;
        er.x2 = anchors[e].x2;
        er.anchor_distance = anchors[e].distance;
        er.rho = level.dist(er.v1, er.v2);
        er.parallel = decs[e].parallel_full_dim;
        for (const auto& fp : decs[e].pairs) {
          er.radii.push_back(fp.radius);
          er.pair_dims.push_back(fp.flat.dim());
        }
        diag_.edges.push_back(std::move(er));
      }
    }
    return out;
  }

 private:
  static double max_scale(const std::vector<Vector>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s = std::max(s, max_norm(p));
    return s;
  }

  // Re-runs the cube selection on every entry of V-bar with distance
  // C rho(v1, v1') and returns the largest deviation from the quotient.
  template <typename NameFn>
  double factorization_defect(const Level& level, const std::vector<Entry>& entries,
                              const std::vector<Vector>& fbar, double c_stage, const std::vector<Vector>& hat,
                              NameFn&& name) const {
    const std::size_t m = entries.size();
    const Eigen::Index n = hat.empty() ? 0 : hat.front().size();
    std::vector<Vector> lo(m), hi(m);
    std::vector<char> bounded(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const double r = entries[i].face.radius;
      if (std::isfinite(r)) {
        bounded[i] = 1;
        lo[i] = (fbar[i].array() - c_stage * r).matrix();
        hi[i] = (fbar[i].array() + c_stage * r).matrix();
      } else {
        lo[i] = Vector::Constant(n, -kInf);
        hi[i] = Vector::Constant(n, kInf);
      }
    }
    auto dist = [&](int a, int b) { return c_stage * level.dist(entries[a].v1, entries[b].v1); };
    auto nm = [&](int a, int b) { return name(entries[a].v1, entries[b].v1); };
    const std::vector<Vector> full = interval_select(lo, hi, bounded, dist, opt_.hypothesis_slack, nm,
                                                     "cube stage on the doubled space");
    double defect = 0.0;
    for (std::size_t i = 0; i < m; ++i) defect = std::max(defect, max_dist(full[i], hat[entries[i].v1]));
    return defect;
  }

  const SelectOptions& opt_;
  SelectionDiagnostics& diag_;
};

inline void validate_affine_map(const AffineMap& am, const Tolerances& tol) {
  am.graph.validate_shape();
  require(static_cast<int>(am.flats.size()) == am.graph.num_vertices,
          "AffineMap: one flat per vertex required");
  require(am.k >= 0, "AffineMap: k must be non-negative");
  const int n = am.ambient_dim();
  for (std::size_t v = 0; v < am.flats.size(); ++v) {
    const auto& f = am.flats[v];
    require(f.ambient_dim() == n, "AffineMap: flats live in different ambient dimensions");
    require(f.dim() <= am.k, "AffineMap: flat " + std::to_string(v) + " has dimension above k");
    require(f.dim() <= n, "AffineMap: flat dimension exceeds ambient dimension");
    require(f.base.allFinite() && f.basis.allFinite(), "AffineMap: non-finite flat data");
    require(f.orthonormality_defect() <= 10 * tol.rank, "AffineMap: flat basis is not orthonormal");
  }
}

}  // namespace detail

/** Cube-valued selection with seminorm <= 1 under the two-point hypothesis. */
inline Selection select_cube(const CubeMap& cm, const Tolerances& tol = {}) {
  const int m = cm.space.size();
  require(static_cast<int>(cm.cubes.size()) == m, "select_cube: one cube per point required");
  Selection s;
  if (m == 0) return s;
  const Eigen::Index n = cm.cubes.front().center.size();
  std::vector<Vector> lo(m), hi(m);
  std::vector<char> bounded(m, 0);
  for (int i = 0; i < m; ++i) {
    const Cube& q = cm.cubes[i];
    require(q.center.size() == n, "select_cube: cubes in different dimensions");
    require(q.radius >= 0 && !std::isnan(q.radius), "select_cube: negative radius");
    if (q.bounded()) {
      bounded[i] = 1;
      lo[i] = (q.center.array() - q.radius).matrix();
      hi[i] = (q.center.array() + q.radius).matrix();
    } else {
      lo[i] = Vector::Constant(n, -kInf);
      hi[i] = Vector::Constant(n, kInf);
    }
  }
  s.points = detail::interval_select(
      lo, hi, bounded, [&](int i, int j) { return cm.space(i, j); }, tol.feasibility,
      [](int i, int j) { return std::vector<int>{i, j}; }, "select_cube");
  s.seminorm = lipschitz_seminorm(s.points, cm.space, detail::zero_tolerance(s.points));
  s.diagnostics.stage_constant = 1.0;
  return s;
}

/** Lipschitz selection of an affine-set-valued map by the recursive construction. */
namespace detail {

// Minimum-norm least-squares point of the stacked equations (I - B B^T) x =
// (I - B B^T) base; returned only if it lies on every flat.
inline std::optional<Vector> common_point(const std::vector<AffineSubspace>& flats, double tol) {
  const Eigen::Index n = flats.front().ambient_dim();
  Matrix rows(static_cast<Eigen::Index>(flats.size()) * n, n);
  Vector rhs(rows.rows());
  for (std::size_t v = 0; v < flats.size(); ++v) {
    const Matrix& b = flats[v].basis;
    const Matrix proj = Matrix::Identity(n, n) - b * b.transpose();
    rows.middleRows(static_cast<Eigen::Index>(v) * n, n) = proj;
    rhs.segment(static_cast<Eigen::Index>(v) * n, n) = proj * flats[v].base;
  }
  const Vector x = rows.completeOrthogonalDecomposition().solve(rhs);
  if (!x.allFinite()) return std::nullopt;
  for (const auto& f : flats)
    if (f.residual(x) > tol * (1.0 + max_norm(f.base) + max_norm(x))) return std::nullopt;
  return x;
}

inline bool is_complete(const WeightedGraph& g) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& e : g.edges)
    if (e.u != e.v) pairs.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  const std::size_t n = static_cast<std::size_t>(g.num_vertices);
  return pairs.size() == n * (n - 1) / 2;
}

}  // namespace detail

inline Selection select_affine(const AffineMap& am, const SelectOptions& opt = {});

namespace detail {

// Whole-space flats constrain nothing, so on a complete graph the others are
// selected alone and the rest filled in by f_j(v) = min_u f_j(u) + L rho(u, v),
// which is L-Lipschitz in every coordinate and so in the max norm.
inline Selection select_around_free_vertices(const AffineMap& am, const SelectOptions& opt,
                                             const std::vector<int>& kept) {
  const int nv = am.graph.num_vertices;
  const Eigen::Index n = am.flats.front().ambient_dim();
  const int m = static_cast<int>(kept.size());
  Matrix sub(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sub(i, j) = am.graph.rho(kept[i], kept[j]);
  AffineMap reduced{full_graph(PseudometricSpace(sub)), {}, am.k};
  for (int v : kept) reduced.flats.push_back(am.flats[v]);

  Selection part;
  if (m > 0) {
    try {
      part = select_affine(reduced, opt);
    } catch (const HypothesisFailure& e) {
      std::vector<int> subset;
      for (int i : e.subset()) subset.push_back(kept[i]);
      throw HypothesisFailure(e.what(), subset);
    }
  }

  Selection s;
  s.diagnostics = std::move(part.diagnostics);
  auto& dg = s.diagnostics;
  dg.k_requested = am.k;
  dg.lipschitz_bound = opt.lipschitz_bound;
  dg.k_effective = static_cast<int>(n);
  for (auto& e : dg.edges) {
    e.v1 = kept[e.v1];
    e.v2 = kept[e.v2];
  }
  std::vector<char> is_kept(nv, 0);
  s.points.assign(nv, Vector::Zero(n));
  for (int i = 0; i < m; ++i) {
    is_kept[kept[i]] = 1;
    s.points[kept[i]] = part.points[i];
  }
  const double lip = part.seminorm;
  for (int v = 0; v < nv; ++v) {
    if (is_kept[v]) continue;
    dg.free_vertices.push_back(v);
    int nearest = -1;
    for (int u : kept)
      if (nearest < 0 || am.graph.rho(u, v) < am.graph.rho(nearest, v)) nearest = u;
    if (nearest < 0 || !std::isfinite(am.graph.rho(nearest, v))) continue;
    if (!std::isfinite(lip)) {
      s.points[v] = s.points[nearest];
      continue;
    }
    Vector x = Vector::Constant(n, kInf);
    for (int u : kept)
      if (std::isfinite(am.graph.rho(u, v)))
        x = x.cwiseMin((s.points[u].array() + lip * am.graph.rho(u, v)).matrix());
    s.points[v] = x;
  }
  if (dg.has_cube_stage) {
    std::vector<Vector> cube(nv);
    std::vector<double> radius(nv, kInf);
    for (int v = 0; v < nv; ++v) cube[v] = s.points[v];
    for (int i = 0; i < m; ++i) {
      cube[kept[i]] = dg.cube_points[i];
      radius[kept[i]] = dg.min_radius[i];
    }
    dg.cube_points = std::move(cube);
    dg.min_radius = std::move(radius);
  }
  s.seminorm = lipschitz_seminorm(s.points, am.graph.rho, zero_tolerance(s.points));
  return s;
}

}  // namespace detail

inline Selection select_affine(const AffineMap& am, const SelectOptions& opt) {
  detail::validate_affine_map(am, opt.tol);
  require(std::isfinite(opt.lipschitz_bound) && opt.lipschitz_bound > 0,
          "select_affine: lipschitz_bound must be positive");
  Selection s;
  s.diagnostics.k_requested = am.k;
  s.diagnostics.lipschitz_bound = opt.lipschitz_bound;
  const int nv = am.graph.num_vertices;
  if (nv == 0) return s;
  int k_eff = 0;
  for (const auto& f : am.flats) k_eff = std::max(k_eff, f.dim());
  s.diagnostics.k_effective = k_eff;
  if (const auto p = detail::common_point(am.flats, opt.tol.feasibility)) {
    s.diagnostics.common_point = true;
    s.points.assign(nv, *p);
    return s;
  }
  std::vector<int> kept;
  for (int v = 0; v < nv; ++v)
    if (am.flats[v].dim() < am.flats[v].ambient_dim()) kept.push_back(v);
  if (static_cast<int>(kept.size()) < nv && detail::is_complete(am.graph))
    return detail::select_around_free_vertices(am, opt, kept);

  detail::Level top;
  top.size = nv;
  top.dense = opt.lipschitz_bound * am.graph.rho.dist;
  top.has_dense = true;
  for (const auto& e : am.graph.edges) {
    top.edges.emplace_back(e.u, e.v);
    top.edges.emplace_back(e.v, e.u);
  }
  std::sort(top.edges.begin(), top.edges.end());
  top.edges.erase(std::unique(top.edges.begin(), top.edges.end()), top.edges.end());

  detail::AffineSelector selector(opt, s.diagnostics);
  s.points = selector.run(top, am.flats, 0);
  s.seminorm = lipschitz_seminorm(s.points, am.graph.rho, detail::zero_tolerance(s.points));
  return s;
}

struct CubeDeviationCheck {
  int vertex = 0;
  double deviation = 0.0;  ///< |cube point - selection|_inf
  double bound = 0.0;      ///< lambda * least face radius at the vertex
  bool holds = true;
};

struct ValidationReport {
  std::vector<double> membership_residuals;
  double max_membership_residual = 0.0;
  double seminorm = 0.0;
  double factor = 1.0;
  bool base_case = false;
  bool base_case_bound_holds = true;  ///< seminorm <= A^2 when k_effective = 0
  std::vector<CubeDeviationCheck> cube_deviation;
  /// 4 n lambda^2 rho(v, v') per top-level edge (context only, not asserted).
  std::vector<double> edge_radius_context;
  bool ok = true;
};

/** Re-checks a selection: membership, seminorm, and the cube-stage bounds. */
inline ValidationReport validate_selection(const AffineMap& am, const Selection& s, double tol = 1e-8) {
  ValidationReport rep;
  rep.factor = am.graph.factor;
  const std::size_t nv = am.flats.size();
  require(s.points.size() == nv, "validate_selection: point count differs from vertex count");
  for (std::size_t v = 0; v < nv; ++v) {
    const double r = am.flats[v].residual(s.points[v]);
    rep.membership_residuals.push_back(r);
    rep.max_membership_residual = std::max(rep.max_membership_residual, r);
  }
  rep.seminorm = lipschitz_seminorm(s.points, am.graph.rho, detail::zero_tolerance(s.points));
  const auto& dg = s.diagnostics;
  rep.base_case = !dg.has_cube_stage;
  if (rep.base_case)
    rep.base_case_bound_holds = rep.seminorm <= am.graph.factor * am.graph.factor + 1e-9;
  if (dg.has_cube_stage) {
    for (std::size_t v = 0; v < nv; ++v) {
      CubeDeviationCheck c;
      c.vertex = static_cast<int>(v);
      c.deviation = max_dist(dg.cube_points[v], s.points[v]);
      c.bound = dg.lambda * dg.min_radius[v];
      c.holds = !(c.deviation > c.bound + tol * (1.0 + max_norm(s.points[v])));
      rep.cube_deviation.push_back(c);
    }
    const double n = static_cast<double>(am.ambient_dim());
    for (const auto& e : dg.edges) rep.edge_radius_context.push_back(4.0 * n * dg.lambda * dg.lambda * e.rho);
  }
  rep.ok = rep.max_membership_residual <= tol && rep.base_case_bound_holds;
  for (const auto& c : rep.cube_deviation) rep.ok = rep.ok && c.holds;
  return rep;
}

}  // namespace lipsel
