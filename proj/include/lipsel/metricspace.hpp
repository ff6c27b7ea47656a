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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lipsel/core.hpp"

namespace lipsel {

/** Finite extended pseudometric given by its distance matrix. */
struct PseudometricSpace {
  Matrix dist;

  PseudometricSpace() = default;
  explicit PseudometricSpace(Matrix d) : dist(std::move(d)) {}

  int size() const { return static_cast<int>(dist.rows()); }
  double operator()(int i, int j) const { return dist(i, j); }

  /** Largest violation of symmetry, zero diagonal or the triangle inequality. */
  double axiom_defect() const {
    const int n = size();
    double defect = 0.0;
    for (int i = 0; i < n; ++i) {
      defect = std::max(defect, std::abs(dist(i, i)));
      for (int j = 0; j < n; ++j) {
        if (dist(i, j) < 0) defect = std::max(defect, -dist(i, j));
        if (dist(i, j) != dist(j, i)) {
          const double gap = std::abs(dist(i, j) - dist(j, i));
          defect = std::max(defect, std::isnan(gap) ? kInf : gap);
        }
        for (int k = 0; k < n; ++k) {
          const double via = dist(i, k) + dist(k, j);
          if (dist(i, j) > via) defect = std::max(defect, dist(i, j) - via);
        }
      }
    }
    return defect;
  }

  void validate(double tol = 1e-9) const {
    require(dist.rows() == dist.cols(), "PseudometricSpace: distance matrix is not square");
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j)
        require(!std::isnan(dist(i, j)) && dist(i, j) >= 0, "PseudometricSpace: negative or NaN distance");
    const double d = axiom_defect();
    require(d <= tol, "PseudometricSpace: axioms violated by " + std::to_string(d));
  }
};

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

/**
 * Weighted graph with comparison metric rho and factor A such that
 * rho / A <= sigma <= A rho for the path pseudometric sigma.
 */
struct WeightedGraph {
  int num_vertices = 0;
  std::vector<Edge> edges;
  PseudometricSpace rho;
  double factor = 1.0;

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(num_vertices);
    for (const auto& e : edges) {
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    return adj;
  }

  void validate_shape() const {
    require(rho.size() == num_vertices, "WeightedGraph: comparison metric size differs from vertex count");
    require(factor >= 1.0, "WeightedGraph: factor A must be at least 1");
    for (const auto& e : edges) {
      require(e.u >= 0 && e.v >= 0 && e.u < num_vertices && e.v < num_vertices,
              "WeightedGraph: edge endpoint out of range");
      require(e.u != e.v, "WeightedGraph: self-loop");
      require(e.weight >= 0, "WeightedGraph: negative weight");
    }
  }
};

/** All-pairs shortest paths (Floyd-Warshall); disconnected pairs get inf. */
inline PseudometricSpace path_metric(const WeightedGraph& g) {
  const int n = g.num_vertices;
  Matrix d = Matrix::Constant(n, n, kInf);
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const auto& e : g.edges) {
    d(e.u, e.v) = std::min(d(e.u, e.v), e.weight);
    d(e.v, e.u) = std::min(d(e.v, e.u), e.weight);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (is_inf(d(i, k))) continue;
      for (int j = 0; j < n; ++j) {
        const double via = d(i, k) + d(k, j);
        if (via < d(i, j)) d(i, j) = via;
      }
    }
  PseudometricSpace out(std::move(d));
  double scale = 1.0;
  for (const auto& e : g.edges)
    if (std::isfinite(e.weight)) scale = std::max(scale, e.weight);
  ensure(out.axiom_defect() <= 1e-12 * scale * n, "path_metric: result violates the pseudometric axioms");
  return out;
}

/** Complete graph with weights = distances and A = 1. */
inline WeightedGraph full_graph(const PseudometricSpace& space) {
  WeightedGraph g;
  g.num_vertices = space.size();
  g.rho = space;
  g.factor = 1.0;
  for (int i = 0; i < g.num_vertices; ++i)
    for (int j = i + 1; j < g.num_vertices; ++j) g.edges.push_back({i, j, space(i, j)});
  return g;
}

/**
 * Smallest A >= 1 with rho / A <= sigma <= A rho entrywise (inf when no
 * such A exists, e.g. sigma = inf where rho is finite).
 */
inline double comparison_factor(const PseudometricSpace& sigma, const PseudometricSpace& rho) {
  double a = 1.0;
  const int n = rho.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double s = sigma(i, j), r = rho(i, j);
      if (s == r) continue;
      if (r == 0.0 || s == 0.0 || is_inf(s) || is_inf(r)) return kInf;
      a = std::max({a, s / r, r / s});
    }
  return a;
}

/** True when rho / A <= sigma <= A rho holds entrywise up to relative slack. */
inline bool satisfies_comparison(const PseudometricSpace& sigma, const PseudometricSpace& rho, double a,
                                 double rel_slack = 0.0) {
  const int n = rho.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = sigma(i, j), r = rho(i, j);
      if (is_inf(r) || is_inf(s)) {
        if (is_inf(r) != is_inf(s)) return false;
        continue;
      }
      if (r / a > s * (1.0 + rel_slack) + 1e-300) return false;
      if (s > a * r * (1.0 + rel_slack)) return false;
    }
  return true;
}

/**
 * Calls visit(W) for every vertex subset W with |W| <= max_size whose
 * induced subgraph has no isolated vertex, plus all singletons. Subsets are
 * produced in increasing size, then lexicographic order.
 */
inline void for_each_admissible_subset(const WeightedGraph& g, int max_size,
                                       const std::function<void(const std::vector<int>&)>& visit) {
  require(max_size >= 1, "admissible_subsets: max_size must be at least 1");
  const int n = g.num_vertices;
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& e : g.edges) adj[e.u][e.v] = adj[e.v][e.u] = 1;
  std::vector<int> subset;
  const int top = std::min(max_size, n);
  for (int size = 1; size <= top; ++size) {
    subset.assign(size, 0);
    for (int i = 0; i < size; ++i) subset[i] = i;
    while (true) {
      bool ok = true;
      if (size > 1) {
        for (int a : subset) {
          bool has = false;
          for (int b : subset)
            if (adj[a][b]) {
              has = true;
              break;
            }
          if (!has) {
            ok = false;
            break;
          }
        }
      }
      if (ok) visit(subset);
      int i = size - 1;
      while (i >= 0 && subset[i] == n - size + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
    }
  }
}

inline std::vector<std::vector<int>> admissible_subsets(const WeightedGraph& g, int max_size) {
  std::vector<std::vector<int>> out;
  for_each_admissible_subset(g, max_size, [&](const std::vector<int>& w) { out.push_back(w); });
  return out;
}

// ---------------------------------------------------------------------------
// Moduli of continuity
// ---------------------------------------------------------------------------

/**
 * A modulus of continuity. Every kind is evaluated as min(cap, base(t)) with
 * base(t) = scale * t^alpha for the power kinds, or the piecewise-linear
 * interpolant through (0, 0) and the knots (constant past the last knot) for
 * the tabulated kind. omega(0) is taken to be 0.
 */
struct Modulus {
  enum class Kind { kPower, kCappedPower, kTabulated };

  Kind kind = Kind::kPower;
  double alpha = 1.0;
  double scale = 1.0;
  double cap = kInf;
  std::vector<double> knots;
  std::vector<double> values;

  static Modulus power(double alpha, double scale = 1.0) {
    Modulus m;
    m.kind = Kind::kPower;
    m.alpha = alpha;
    m.scale = scale;
    m.check();
    return m;
  }
  static Modulus capped_power(double alpha, double cap, double scale = 1.0) {
    Modulus m = power(alpha, scale);
    m.kind = Kind::kCappedPower;
    m.cap = cap;
    m.check();
    return m;
  }
  static Modulus tabulated(std::vector<double> t, std::vector<double> v) {
    Modulus m;
    m.kind = Kind::kTabulated;
    m.knots = std::move(t);
    m.values = std::move(v);
    m.check();
    return m;
  }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    double base;
    if (kind == Kind::kTabulated) {
      if (t >= knots.back()) {
        base = values.back();
      } else {
        const auto it = std::upper_bound(knots.begin(), knots.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - knots.begin());
        const double t0 = hi == 0 ? 0.0 : knots[hi - 1];
        const double v0 = hi == 0 ? 0.0 : values[hi - 1];
        base = v0 + (values[hi] - v0) * (t - t0) / (knots[hi] - t0);
      }
    } else {
      base = is_inf(t) ? kInf : scale * std::pow(t, alpha);
    }
    return std::min(cap, base);
  }

  const char* kind_name() const {
    switch (kind) {
      case Kind::kPower: return "power";
      case Kind::kCappedPower: return "capped-power";
      case Kind::kTabulated: return "tabulated";
    }
    return "unknown";
  }

  /**
   * Audits positivity, monotonicity and midpoint concavity on a log grid of
   * 10^3 points in [2^-30, 2^10], and decay towards 0. Returns an empty
   * string on success, else a description of the first failure.
   */
  std::string audit() const {
    const int count = 1000;
    std::vector<double> ts(count);
    for (int i = 0; i < count; ++i) ts[i] = std::ldexp(1.0, -30) * std::pow(2.0, 40.0 * i / (count - 1));
    for (int i = 0; i < count; ++i) {
      const double w = (*this)(ts[i]);
      if (!(w > 0.0)) return "not positive at t=" + std::to_string(ts[i]);
      if (i > 0 && w < (*this)(ts[i - 1]) * (1 - 1e-14)) return "decreasing at t=" + std::to_string(ts[i]);
    }
    for (int step : {1, 7, 50, 333}) {
      for (int i = 0; i + step < count; ++i) {
        const double a = ts[i], b = ts[i + step];
        const double mid = (*this)(0.5 * (a + b));
        const double chord = 0.5 * ((*this)(a) + (*this)(b));
        if (mid < chord - 1e-12 * std::max(1.0, chord))
          return "not midpoint-concave on [" + std::to_string(a) + ", " + std::to_string(b) + "]";
      }
    }
    const double w30 = (*this)(std::ldexp(1.0, -30)), w15 = (*this)(std::ldexp(1.0, -15));
    if (!(w30 < w15 && w15 <= (*this)(1.0))) return "does not decay towards 0";
    return {};
  }

 private:
  void check() const {
    if (kind == Kind::kTabulated) {
      require(!knots.empty() && knots.size() == values.size(), "Modulus: knots and values differ in length");
      for (std::size_t i = 0; i < knots.size(); ++i) {
        require(std::isfinite(knots[i]) && knots[i] > (i == 0 ? 0.0 : knots[i - 1]),
                "Modulus: knots must be positive and strictly increasing");
        require(std::isfinite(values[i]) && values[i] > 0, "Modulus: tabulated values must be positive");
      }
    } else {
      require(alpha > 0 && alpha <= 1, "Modulus: exponent alpha must lie in (0, 1]");
      require(std::isfinite(scale) && scale > 0, "Modulus: scale must be positive");
    }
    require(cap > 0, "Modulus: cap must be positive");
  }
};

/** omega_bar = min(1, omega); audited before returning. */
inline Modulus normalize_modulus(const Modulus& m) {
  Modulus out = m;
  out.cap = std::min(m.cap, 1.0);
  if (out.kind == Modulus::Kind::kPower) out.kind = Modulus::Kind::kCappedPower;
  const std::string msg = out.audit();
  require(msg.empty(), "normalize_modulus: audit failed: " + msg);
  return out;
}

}  // namespace lipsel
