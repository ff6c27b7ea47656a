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

#include "lipsel/instances.hpp"
#include "lipsel/oracle.hpp"

using namespace lipsel;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

PseudometricSpace two_point_space(double d) {
  Matrix m(2, 2);
  m << 0, d, d, 0;
  return PseudometricSpace(m);
}

}  // namespace

TEST(OptimalSelectionLp, EqualPointFlats) {
  Rng rng(1);
  const PseudometricSpace s(instances::random_metric(rng, 4, 2, 1.0));
  const std::vector<AffineSubspace> flats(4, AffineSubspace::point(vec({1, 2})));
  EXPECT_EQ(optimal_selection_lp(s, flats).lambda_star, 0.0);
}

TEST(OptimalSelectionLp, TwoPointsAtDistance) {
  const auto rep = optimal_selection_lp(
      two_point_space(1.0), {AffineSubspace::point(vec({0, 0})), AffineSubspace::point(vec({0.3, -0.7}))});
  EXPECT_NEAR(rep.lambda_star, 0.7, 1e-12);
}

TEST(OptimalSelectionLp, AxisAndPoint) {
  const auto rep = optimal_selection_lp(
      two_point_space(1.0), {AffineSubspace(vec({0, 0}), Matrix::Identity(2, 1)), AffineSubspace::point(vec({0, 1}))});
  EXPECT_NEAR(rep.lambda_star, 1.0, 1e-12);
  ASSERT_EQ(rep.witness.size(), 2u);
  EXPECT_LE(std::abs(rep.witness[0][0]), 1.0 + 1e-12);
  EXPECT_EQ(rep.witness[0][1], 0.0);
}

TEST(OptimalSelectionLp, ZeroDistanceDisjointIsInfinite) {
  const auto rep = optimal_selection_lp(two_point_space(0.0),
                                        {AffineSubspace::point(vec({0})), AffineSubspace::point(vec({1}))});
  EXPECT_TRUE(is_inf(rep.lambda_star));
}

TEST(OptimalSelectionLp, WitnessAchievesOptimum) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    instances::SelectionParams p{rng.integer(1, 3), rng.integer(0, 2), rng.integer(2, 6), false, rng.coin(0.5)};
    const AffineMap am = instances::random_affine_map(rng, p);
    const auto rep = optimal_selection_lp(am.graph.rho, am.flats);
    ASSERT_TRUE(std::isfinite(rep.lambda_star));
    for (std::size_t v = 0; v < am.flats.size(); ++v) EXPECT_LE(am.flats[v].residual(rep.witness[v]), 1e-9);
    EXPECT_LE(lipschitz_seminorm(rep.witness, am.graph.rho), rep.lambda_star + 1e-8);
    if (p.planted) EXPECT_LE(rep.lambda_star, 1.0 + 1e-9);
  }
}

TEST(OptimalSelectionLp, IsALowerBoundForTheEngine) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    instances::SelectionParams p{rng.integer(1, 3), rng.integer(0, 2), rng.integer(2, 6), rng.coin(0.5), true};
    const AffineMap am = instances::random_affine_map(rng, p);
    const double lambda = optimal_selection_lp(am.graph.rho, am.flats).lambda_star;
    EXPECT_LE(lambda, select_affine(am).seminorm + 1e-7);
  }
}

TEST(FinitenessCheck, SubsetsNeverExceedGlobalOptimum) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    instances::SelectionParams p{rng.integer(1, 3), rng.integer(0, 1), rng.integer(2, 6), rng.coin(0.5), rng.coin(0.5)};
    const AffineMap am = instances::random_affine_map(rng, p);
    const double global = optimal_selection_lp(am.graph.rho, am.flats).lambda_star;
    const auto rep = finiteness_check(am);
    EXPECT_LE(rep.lambda_star, global + 1e-9 * (1 + global));
    for (const auto& s : rep.subset_results) EXPECT_LE(static_cast<int>(s.subset.size()), 1 << (am.k + 1));
  }
}

TEST(FinitenessCheck, ChainOfPointsMatchesPairwiseBound) {
  // k = 0 on a path: admissible subsets of size <= 2 are singletons and edges.
  WeightedGraph g;
  g.num_vertices = 3;
  Matrix d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  g.rho = PseudometricSpace(d);
  g.edges = {{0, 1, 1}, {1, 2, 1}};
  AffineMap am{g, {AffineSubspace::point(vec({0})), AffineSubspace::point(vec({0.5})), AffineSubspace::point(vec({2}))}, 0};
  const auto rep = finiteness_check(am);
  EXPECT_NEAR(rep.lambda_star, 1.5, 1e-12);
  EXPECT_EQ(rep.worst_subset, (std::vector<int>{1, 2}));
  EXPECT_EQ(rep.subset_results.size(), 5u);
}

TEST(FinitenessCheck, RejectsTooManySubsets) {
  AffineMap am;
  am.k = 4;
  am.graph = full_graph(PseudometricSpace(Matrix::Ones(40, 40) - Matrix::Identity(40, 40)));
  am.flats.assign(40, AffineSubspace::point(vec({0})));
  EXPECT_THROW(finiteness_check(am), InputError);
}

TEST(JetFinitenessCheck, AffineDataOnlyPaysForSupTerms) {
  Rng rng(5);
  SampledFunction sf;
  sf.values.resize(4);
  const Vector g = vec({0.5, -1});
  for (int i = 0; i < 4; ++i) {
    sf.points.push_back(rng.uniform_vector(2, -1, 1));
    sf.values[i] = 0.25 + g.dot(sf.points[i]);
  }
  const auto rep = jet_finiteness_check(sf, 2);
  // Each subset can take g itself (no defects) or trade sup |g| against defects.
  for (const auto& s : rep.subset_results) {
    double supf = 0;
    for (int i : s.subset) supf = std::max(supf, std::abs(sf.values[i]));
    EXPECT_GE(s.lambda, supf - 1e-12);
    EXPECT_LE(s.lambda, supf + max_norm(g) + 1e-9);
    if (s.subset.size() == 1) EXPECT_NEAR(s.lambda, supf, 1e-12);
  }
}

TEST(JetFinitenessCheck, TwoPointsByHand) {
  // X = {0, 1}, f = {0, 1}, omega(t) = min(1, t). With g = (a, b) the norm is
  // 1 + max(|a|, |b|) + max(|1 - a|, |1 - b|) + |a - b| >= 2, with equality at a = b in [0, 1].
  SampledFunction sf;
  sf.points = {vec({0}), vec({1})};
  sf.values = vec({0, 1});
  EXPECT_NEAR(jet_finiteness_check(sf, 2).lambda_star, 2.0, 1e-9);
}

TEST(JetFinitenessCheck, ScalesWithData) {
  Rng rng(6);
  SampledFunction sf;
  sf.values.resize(3);
  for (int i = 0; i < 3; ++i) {
    sf.points.push_back(rng.uniform_vector(2, -1, 1));
    sf.values[i] = rng.uniform(-1, 1);
  }
  SampledFunction scaled = sf;
  scaled.values *= 3.0;
  const double a = jet_finiteness_check(sf, 3).lambda_star, b = jet_finiteness_check(scaled, 3).lambda_star;
  EXPECT_NEAR(b, 3.0 * a, 1e-8 * (1 + b));
}

TEST(BruteForceEnvelope, OnePieceIsItself) {
  QuadraticFamily fam{1.5, 1, {{vec({0.3}), -0.2}}};
  const Vector w = vec({0.4});
  EXPECT_NEAR(brute_force_envelope(fam, w, {vec({0}), 2.0}, 400), fam.h(w), 1e-4);
}

TEST(BruteForceEnvelope, SymmetricPiecesGiveChord) {
  // min((x-1)^2, (x+1)^2) has envelope 0 on [-1, 1].
  QuadraticFamily fam{1.0, 1, {{vec({-2}), 1.0}, {vec({2}), 1.0}}};
  EXPECT_NEAR(brute_force_envelope(fam, vec({0}), {vec({0}), 2.0}, 400), 0.0, 1e-12);
  EXPECT_NEAR(brute_force_envelope(fam, vec({0.5}), {vec({0}), 2.0}, 400), 0.0, 1e-12);
}

TEST(BruteForceEnvelope, AgreesWithEnvelopeQp) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(1, 2);
    QuadraticFamily fam;
    fam.dim = n;
    fam.c = rng.uniform(0.5, 2.0);
    for (int y = 0; y < rng.integer(1, 4); ++y) fam.pieces.push_back({rng.uniform_vector(n, -2, 2), rng.uniform(-1, 1)});
    const int res = n == 1 ? 800 : 60;
    const Cube box{Vector::Zero(n), 3.0};
    const double step = 2 * box.radius / res;
    const Vector w = rng.uniform_vector(n, -1, 1);
    const double brute = brute_force_envelope(fam, w, box, res);
    const double qp = envelope_eval(fam, w).value;
    EXPECT_GE(brute, qp - 1e-9);
    // Off-grid queries interpolate h linearly between grid points.
    EXPECT_LE(brute, fam.h(w) + fam.c * step * step);
    EXPECT_LE(brute - qp, 2 * step) << "trial " << trial;
  }
}

TEST(BruteForceEnvelope, MatchesTheFullGridLp) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    QuadraticFamily fam;
    fam.dim = 2;
    fam.c = rng.uniform(0.5, 20.0);
    for (int y = 0; y < 4; ++y) fam.pieces.push_back({rng.uniform_vector(2, -4, 4), rng.uniform(-1, 1)});
    const int res = 12;
    const Cube box{Vector::Zero(2), 1.5};
    const Vector w = rng.uniform_vector(2, -1, 1);
    LinearProgram lp((res + 1) * (res + 1));
    lp.nonnegative.assign(lp.num_variables, true);
    Matrix rows = Matrix::Zero(3, lp.num_variables);
    for (int i = 0; i <= res; ++i)
      for (int j = 0; j <= res; ++j) {
        const int col = j * (res + 1) + i;
        const Vector x = vec({-1.5 + 3.0 * i / res, -1.5 + 3.0 * j / res});
        rows.col(col) << x[0], x[1], 1.0;
        lp.objective[col] = fam.h(x);
      }
    lp.add_eq(rows.row(0).transpose(), w[0]);
    lp.add_eq(rows.row(1).transpose(), w[1]);
    lp.add_eq(rows.row(2).transpose(), 1.0);
    const LpResult full = solve_lp(lp);
    ASSERT_EQ(full.status, LpStatus::kOptimal);
    EXPECT_NEAR(brute_force_envelope(fam, w, box, res), full.value, 1e-9 * (1 + std::abs(full.value)));
  }
}

TEST(BruteForceEnvelope, FineGridsAreCheap) {
  QuadraticFamily fam{1e6, 1, {{vec({-2e6}), 1e6}, {vec({2e6}), 1e6}}};
  // 10^7 grid points; the pieces touch zero at -1 and 1.
  EXPECT_NEAR(brute_force_envelope(fam, vec({0.3}), {vec({0}), 2.0}, 10000000), 0.0, 1e-6);
}

TEST(BruteForceEnvelope, RejectsQueryOutsideBox) {
  QuadraticFamily fam{1.0, 1, {{vec({0}), 0.0}}};
  EXPECT_THROW(brute_force_envelope(fam, vec({3}), {vec({0}), 1.0}, 10), InputError);
}
