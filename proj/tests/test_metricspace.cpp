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

#include <gtest/gtest.h>

#include <set>

#include "lipsel/metricspace.hpp"
#include "lipsel/random.hpp"

using namespace lipsel;

namespace {

WeightedGraph random_graph(Rng& rng, int n, double p) {
  WeightedGraph g;
  g.num_vertices = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.coin(p)) g.edges.push_back({i, j, rng.uniform(0.1, 3.0)});
  g.rho = PseudometricSpace(Matrix::Zero(n, n));
  return g;
}

// Minimum path weight by enumerating simple paths.
double enumerate_paths(const WeightedGraph& g, int from, int to) {
  if (from == to) return 0.0;
  Matrix w = Matrix::Constant(g.num_vertices, g.num_vertices, kInf);
  for (const auto& e : g.edges) {
    w(e.u, e.v) = std::min(w(e.u, e.v), e.weight);
    w(e.v, e.u) = std::min(w(e.v, e.u), e.weight);
  }
  double best = kInf;
  std::vector<char> used(g.num_vertices, 0);
  std::function<void(int, double)> walk = [&](int at, double len) {
    if (at == to) {
      best = std::min(best, len);
      return;
    }
    used[at] = 1;
    for (int nb = 0; nb < g.num_vertices; ++nb)
      if (!used[nb] && std::isfinite(w(at, nb))) walk(nb, len + w(at, nb));
    used[at] = 0;
  };
  walk(from, 0.0);
  return best;
}

}  // namespace

TEST(PathMetric, Chain) {
  WeightedGraph g;
  g.num_vertices = 3;
  g.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
  EXPECT_EQ(path_metric(g)(0, 2), 2.0);
}

TEST(PathMetric, DisconnectedIsInfinite) {
  WeightedGraph g;
  g.num_vertices = 2;
  EXPECT_TRUE(is_inf(path_metric(g)(0, 1)));
}

TEST(PathMetric, MatchesPathEnumeration) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightedGraph g = random_graph(rng, rng.integer(2, 6), 0.5);
    const PseudometricSpace s = path_metric(g);
    EXPECT_LE(s.axiom_defect(), 1e-12);
    for (int i = 0; i < g.num_vertices; ++i)
      for (int j = 0; j < g.num_vertices; ++j) {
        const double want = enumerate_paths(g, i, j);
        if (is_inf(want))
          EXPECT_TRUE(is_inf(s(i, j)));
        else
          EXPECT_NEAR(s(i, j), want, 1e-12);
      }
  }
}

TEST(AdmissibleSubsets, Triangle) {
  WeightedGraph g;
  g.num_vertices = 3;
  g.edges = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}};
  const auto subs = admissible_subsets(g, 2);
  EXPECT_EQ(subs.size(), 6u);
}

TEST(AdmissibleSubsets, EdgelessPair) {
  WeightedGraph g;
  g.num_vertices = 2;
  const auto subs = admissible_subsets(g, 2);
  ASSERT_EQ(subs.size(), 2u);
  for (const auto& s : subs) EXPECT_EQ(s.size(), 1u);
}

TEST(AdmissibleSubsets, MatchesPowerSetFilter) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(1, 6);
    const WeightedGraph g = random_graph(rng, n, 0.4);
    const int max_size = rng.integer(1, 6);
    std::set<std::vector<int>> got;
    for (const auto& s : admissible_subsets(g, max_size)) got.insert(s);
    std::set<std::vector<int>> want;
    for (int mask = 1; mask < (1 << n); ++mask) {
      std::vector<int> w;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) w.push_back(i);
      if (static_cast<int>(w.size()) > max_size) continue;
      bool ok = true;
      if (w.size() > 1)
        for (int a : w) {
          bool has = false;
          for (const auto& e : g.edges)
            if ((e.u == a && (mask >> e.v & 1)) || (e.v == a && (mask >> e.u & 1))) has = true;
          ok = ok && has;
        }
      if (ok) want.insert(w);
    }
    EXPECT_EQ(got, want);
  }
}

TEST(FullGraph, PathMetricEqualsRho) {
  Rng rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const int n = rng.integer(2, 7);
    Matrix pts(n, 2);
    for (int i = 0; i < n; ++i) pts.row(i) = rng.uniform_vector(2, -1, 1).transpose();
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
    const PseudometricSpace space(d);
    const WeightedGraph g = full_graph(space);
    EXPECT_EQ(g.factor, 1.0);
    const PseudometricSpace sigma = path_metric(g);
    EXPECT_TRUE(satisfies_comparison(sigma, space, 1.0));
    EXPECT_LE((sigma.dist - space.dist).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ComparisonFactor, SparseGraph) {
  // Path 0-1-2 with rho = |i - j|, weights 1: sigma = rho, A = 1.
  WeightedGraph g;
  g.num_vertices = 3;
  g.edges = {{0, 1, 1}, {1, 2, 1}};
  Matrix r(3, 3);
  r << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  EXPECT_EQ(comparison_factor(path_metric(g), PseudometricSpace(r)), 1.0);
  r(0, 2) = r(2, 0) = 1.0;
  EXPECT_EQ(comparison_factor(path_metric(g), PseudometricSpace(r)), 2.0);
}

TEST(Modulus, PowerNormalizesToCappedIdentity) {
  const Modulus w = normalize_modulus(Modulus::power(1.0));
  for (double t : {0.0, 0.25, 1.0, 3.0}) EXPECT_EQ(w(t), std::min(1.0, t));
}

TEST(Modulus, AlreadyBoundedIsUnchanged) {
  const Modulus m = Modulus::capped_power(0.5, 0.8);
  const Modulus w = normalize_modulus(m);
  for (int i = 0; i < 1000; ++i) {
    const double t = std::ldexp(1.0, -30) * std::pow(2.0, 40.0 * i / 999);
    EXPECT_EQ(w(t), m(t));
  }
}

TEST(Modulus, NormalizedIsBelowOneAndOriginal) {
  for (const Modulus& m : {Modulus::power(0.3, 4.0), Modulus::power(1.0, 0.5),
                           Modulus::tabulated({0.5, 1.0, 4.0}, {1.0, 1.5, 2.0})}) {
    ASSERT_EQ(m.audit(), "");
    const Modulus w = normalize_modulus(m);
    for (int i = 0; i < 1000; ++i) {
      const double t = std::ldexp(1.0, -30) * std::pow(2.0, 40.0 * i / 999);
      EXPECT_LE(w(t), 1.0);
      EXPECT_LE(w(t), m(t));
    }
  }
}

TEST(Modulus, AuditRejectsNonConcaveTable) {
  const Modulus m = Modulus::tabulated({1.0, 2.0}, {0.1, 5.0});
  EXPECT_NE(m.audit(), "");
  EXPECT_THROW(normalize_modulus(m), InputError);
}

TEST(Modulus, RejectsBadExponent) {
  EXPECT_THROW(Modulus::power(0.0), InputError);
  EXPECT_THROW(Modulus::power(1.5), InputError);
}

TEST(Modulus, TabulatedInterpolation) {
  const Modulus m = Modulus::tabulated({1.0, 3.0}, {2.0, 3.0});
  EXPECT_DOUBLE_EQ(m(0.5), 1.0);
  EXPECT_DOUBLE_EQ(m(2.0), 2.5);
  EXPECT_DOUBLE_EQ(m(10.0), 3.0);
}
