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

// C^{1,omega} Whitney jets on finite sets and their correspondence with
// Lipschitz selections of the hyperplane map L_f on the space of pairs.
// All norms of points and vectors are max-norms unless marked Euclidean.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/selection.hpp"

namespace lipsel {

struct SampledFunction {
  std::vector<Vector> points;
  Vector values;
  Modulus omega = Modulus::power(1.0);

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
};

struct Jet1 {
  std::vector<Vector> points;
  Vector values;
  std::vector<Vector> gradients;
  Modulus omega = Modulus::power(1.0);

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  SampledFunction function() const { return {points, values, omega}; }
};

/** Ordered pairs (x, y), x != y, optionally followed by the star point. */
struct PairSpace {
  int num_points = 0;
  std::vector<std::pair<int, int>> pairs;
  bool starred = false;
  Modulus omega = Modulus::power(1.0);  ///< normalized
  PseudometricSpace metric;
  WeightedGraph graph;

  int size() const { return static_cast<int>(pairs.size()) + (starred ? 1 : 0); }
  int star() const { return starred ? static_cast<int>(pairs.size()) : -1; }
  int index(int x, int y) const { return x * (num_points - 1) + (y < x ? y : y - 1); }
};

struct JetNorms {
  double sup_f = 0.0;
  double sup_g = 0.0;
  double taylor = 0.0;  ///< sup |f(x) - f(y) - <g(y), x - y>| / (|x - y| omega(|x - y|))
  double holder = 0.0;  ///< sup |g(x) - g(y)| / omega(|x - y|)
  double seminorm = 0.0;
  double norm = 0.0;
};

namespace detail {

inline void validate_points(const std::vector<Vector>& pts, const Vector& values, const char* who) {
  require(static_cast<Eigen::Index>(pts.size()) == values.size(), std::string(who) + ": one value per point required");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    require(pts[i].size() == pts.front().size(), std::string(who) + ": points in different dimensions");
    require(pts[i].allFinite() && std::isfinite(values[static_cast<Eigen::Index>(i)]),
            std::string(who) + ": non-finite data");
    for (std::size_t j = 0; j < i; ++j)
      require(max_dist(pts[i], pts[j]) > 0, std::string(who) + ": repeated point " + std::to_string(i));
  }
}

inline void validate_jet(const Jet1& j) {
  validate_points(j.points, j.values, "Jet1");
  require(j.gradients.size() == j.points.size(), "Jet1: one gradient per point required");
  for (const auto& g : j.gradients)
    require(g.size() == j.dim() && g.allFinite(), "Jet1: gradient dimension differs from point dimension");
}

}  // namespace detail

/** The pair space (M_X, rho_omega), optionally starred, with its graph (A = 2). */
inline PairSpace build_pair_space(const SampledFunction& sf, bool starred) {
  require(sf.size() >= 2, "build_pair_space: at least two points required");
  detail::validate_points(sf.points, sf.values, "SampledFunction");
  PairSpace ps;
  ps.num_points = sf.size();
  ps.starred = starred;
  ps.omega = normalize_modulus(sf.omega);
  const int np = sf.size();
  for (int x = 0; x < np; ++x)
    for (int y = 0; y < np; ++y)
      if (x != y) ps.pairs.emplace_back(x, y);
  const int m = ps.size();
  Matrix w(np, np);
  for (int x = 0; x < np; ++x)
    for (int y = 0; y < np; ++y) w(x, y) = x == y ? 0.0 : ps.omega(max_dist(sf.points[x], sf.points[y]));

  Matrix d = Matrix::Zero(m, m);
  const int pn = static_cast<int>(ps.pairs.size());
  for (int a = 0; a < pn; ++a) {
    const auto [x, y] = ps.pairs[a];
    for (int b = a + 1; b < pn; ++b) {
      const auto [xp, yp] = ps.pairs[b];
      d(a, b) = d(b, a) = w(x, y) + w(xp, yp) + w(x, xp);
    }
  }
  if (starred)
    for (int a = 0; a < pn; ++a) d(a, pn) = d(pn, a) = 2.0;
  ps.metric = PseudometricSpace(d);

  WeightedGraph& g = ps.graph;
  g.num_vertices = m;
  g.rho = ps.metric;
  g.factor = 2.0;
  for (int a = 0; a < pn; ++a) {
    const auto [x, y] = ps.pairs[a];
    for (int b = a + 1; b < pn; ++b) {
      const auto [xp, yp] = ps.pairs[b];
      if (x == xp || x == yp || y == xp || y == yp) g.edges.push_back({a, b, w(x, y) + w(xp, yp)});
    }
    if (starred) g.edges.push_back({a, pn, 2.0});
  }
  if (starred) {
    ensure(satisfies_comparison(path_metric(g), ps.metric, 2.0, 1e-12),
           "pair space graph violates the factor-2 comparison with its metric");
  }
  return ps;
}

/** L_f(x, y) = {z : <z, x - y> = f(x) - f(y)}; the star maps to {0}. */
inline std::vector<AffineSubspace> build_Lf(const SampledFunction& sf, const PairSpace& ps) {
  require(ps.num_points == sf.size(), "build_Lf: pair space built for a different point set");
  std::vector<AffineSubspace> flats;
  flats.reserve(ps.size());
  for (const auto& [x, y] : ps.pairs) {
    const Vector dir = sf.points[x] - sf.points[y];
    const double df = sf.values[x] - sf.values[y];
    const Vector base = (df / dir.squaredNorm()) * dir;
    flats.emplace_back(base, orthogonal_complement(dir / dir.norm()));
  }
  if (ps.starred) flats.push_back(AffineSubspace::point(Vector::Zero(sf.dim())));
  return flats;
}

inline std::vector<AffineSubspace> build_Lf(const SampledFunction& sf) {
  return build_Lf(sf, build_pair_space(sf, false));
}

inline JetNorms jet_seminorm(const Jet1& j) {
  detail::validate_jet(j);
  JetNorms out;
  const int np = j.size();
  for (int x = 0; x < np; ++x) {
    out.sup_f = std::max(out.sup_f, std::abs(j.values[x]));
    out.sup_g = std::max(out.sup_g, max_norm(j.gradients[x]));
    for (int y = 0; y < np; ++y) {
      if (x == y) continue;
      const Vector diff = j.points[x] - j.points[y];
      const double t = max_norm(diff);
      const double wt = j.omega(t);
      const double defect = std::abs(j.values[x] - j.values[y] - j.gradients[y].dot(diff));
      out.taylor = std::max(out.taylor, defect / (t * wt));
      out.holder = std::max(out.holder, max_dist(j.gradients[x], j.gradients[y]) / wt);
    }
  }
  out.seminorm = out.taylor + out.holder;
  out.norm = out.sup_f + out.sup_g + out.seminorm;
  return out;
}

struct PairSelection {
  PairSpace space;
  std::vector<Vector> ell;  ///< one point per pair (no star)
  double jet_norm = 0.0;
  double sup_norm = 0.0;
  double lipschitz = 0.0;
};

namespace detail {

// Lipschitz seminorm of ell on the pairs (star excluded) w.r.t. rho_omega.
inline double pair_lipschitz(const PairSpace& ps, const std::vector<Vector>& ell) {
  const int pn = static_cast<int>(ps.pairs.size());
  return lipschitz_seminorm(std::vector<Vector>(ell.begin(), ell.begin() + pn),
                            [&](int a, int b) { return ps.metric(a, b); }, zero_tolerance(ell));
}

}  // namespace detail

/**
 * ell(x, y) = the Euclidean-closest point of L_f(x, y) to g(x). Asserts
 * sup |ell| <= 2 |(f, g)| and Lip(ell) <= |(f, g)|, both with slack 1e-7.
 */
inline PairSelection selection_from_jet(const Jet1& j) {
  detail::validate_jet(j);
  Jet1 jn = j;
  jn.omega = normalize_modulus(j.omega);
  PairSelection out;
  out.space = build_pair_space(jn.function(), false);
  out.jet_norm = jet_seminorm(jn).norm;
  for (const auto& [x, y] : out.space.pairs) {
    const Vector dir = j.points[x] - j.points[y];
    const double df = j.values[x] - j.values[y];
    const Vector& g = j.gradients[x];
    out.ell.push_back(g - ((g.dot(dir) - df) / dir.squaredNorm()) * dir);
  }
  for (const auto& p : out.ell) out.sup_norm = std::max(out.sup_norm, max_norm(p));
  out.lipschitz = detail::pair_lipschitz(out.space, out.ell);
  const double slack = 1e-7 * (1.0 + out.jet_norm);
  ensure(out.sup_norm <= 2.0 * out.jet_norm + slack, "selection_from_jet: sup bound 2|(f,g)| violated");
  ensure(out.lipschitz <= out.jet_norm + slack, "selection_from_jet: Lipschitz bound |(f,g)| violated");
  return out;
}

struct JetFromSelection {
  Jet1 jet;
  std::vector<int> nearest;  ///< x-hat per point
  double c_ell = 0.0;        ///< sup |ell| + Lip(ell)
  double sup_g = 0.0;
  double holder = 0.0;       ///< sup |g(x) - g(x')| / omega(|x - x'|)
  double taylor = 0.0;       ///< sup |f(x) - f(y) - <g(x), x - y>| / (|x - y| omega(|x - y|))
};

/** Nearest other point in max-norm, ties to the lexicographically smallest point. */
inline std::vector<int> nearest_other_points(const std::vector<Vector>& pts) {
  const int np = static_cast<int>(pts.size());
  std::vector<int> out(np, -1);
  auto lex_less = [&](int a, int b) {
    return std::lexicographical_compare(pts[a].data(), pts[a].data() + pts[a].size(), pts[b].data(),
                                        pts[b].data() + pts[b].size());
  };
  for (int x = 0; x < np; ++x) {
    double best = kInf;
    for (int y = 0; y < np; ++y) {
      if (y == x) continue;
      const double d = max_dist(pts[x], pts[y]);
      if (d < best || (d == best && lex_less(y, out[x]))) {
        best = d;
        out[x] = y;
      }
    }
  }
  return out;
}

/**
 * g(x) = ell(x, x-hat). Asserts |g| <= C_ell, g is 3 C_ell-Holder and the
 * Taylor defect is at most 2 n C_ell |x - y| omega(|x - y|), slack 1e-7.
 */
inline JetFromSelection jet_from_selection(const SampledFunction& sf, const std::vector<Vector>& ell) {
  const PairSpace ps = build_pair_space(sf, false);
  const int pn = static_cast<int>(ps.pairs.size());
  require(static_cast<int>(ell.size()) == pn || static_cast<int>(ell.size()) == pn + 1,
          "jet_from_selection: one point per ordered pair required");
  const std::vector<AffineSubspace> flats = build_Lf(sf, ps);
  for (int a = 0; a < pn; ++a) {
    require(ell[a].size() == sf.dim() && ell[a].allFinite(), "jet_from_selection: bad selection point");
    const double r = flats[a].residual(ell[a]);
    require(r <= 1e-8 * (1.0 + max_norm(ell[a])),
            "jet_from_selection: ell(" + std::to_string(ps.pairs[a].first) + ", " +
                std::to_string(ps.pairs[a].second) + ") is not on L_f (residual " + std::to_string(r) + ")");
  }
  JetFromSelection out;
  double sup_ell = 0.0;
  for (int a = 0; a < pn; ++a) sup_ell = std::max(sup_ell, max_norm(ell[a]));
  out.c_ell = sup_ell + detail::pair_lipschitz(ps, ell);
  out.nearest = nearest_other_points(sf.points);
  out.jet.points = sf.points;
  out.jet.values = sf.values;
  out.jet.omega = ps.omega;
  const int np = sf.size();
  for (int x = 0; x < np; ++x) out.jet.gradients.push_back(ell[ps.index(x, out.nearest[x])]);

  const double n = static_cast<double>(sf.dim());
  for (int x = 0; x < np; ++x) {
    out.sup_g = std::max(out.sup_g, max_norm(out.jet.gradients[x]));
    for (int y = 0; y < np; ++y) {
      if (x == y) continue;
      const Vector diff = sf.points[x] - sf.points[y];
      const double t = max_norm(diff), wt = ps.omega(t);
      out.holder = std::max(out.holder, max_dist(out.jet.gradients[x], out.jet.gradients[y]) / wt);
      const double defect = std::abs(sf.values[x] - sf.values[y] - out.jet.gradients[x].dot(diff));
      out.taylor = std::max(out.taylor, defect / (t * wt));
    }
  }
  const double slack = 1e-7 * (1.0 + out.c_ell);
  ensure(out.sup_g <= out.c_ell + slack, "jet_from_selection: |g| <= C_ell violated");
  ensure(out.holder <= 3.0 * out.c_ell + slack, "jet_from_selection: g is not 3 C_ell-Holder");
  ensure(out.taylor <= 2.0 * n * out.c_ell + slack, "jet_from_selection: Taylor bound 2 n C_ell violated");
  return out;
}

struct WhitneyResult {
  Jet1 jet;
  JetNorms norms;
  PairSpace space;
  Selection selection;  ///< on the starred pair space
  double c_ell = 0.0;
  double holder = 0.0;
  double taylor = 0.0;
};

/** Completes f to a C^{1,omega} jet through a selection of the starred L_f. */
inline WhitneyResult whitney_select(const SampledFunction& sf, const SelectOptions& opt = {}) {
  WhitneyResult out;
  out.space = build_pair_space(sf, true);
  SampledFunction fn = sf;
  fn.omega = out.space.omega;
  AffineMap am;
  am.graph = out.space.graph;
  am.flats = build_Lf(fn, out.space);
  am.k = sf.dim() - 1;
  out.selection = select_affine(am, opt);
  const std::vector<Vector> ell(out.selection.points.begin(), out.selection.points.end() - 1);
  const JetFromSelection j = jet_from_selection(fn, ell);
  out.jet = j.jet;
  out.c_ell = j.c_ell;
  out.holder = j.holder;
  out.taylor = j.taylor;
  out.norms = jet_seminorm(out.jet);
  return out;
}

}  // namespace lipsel
