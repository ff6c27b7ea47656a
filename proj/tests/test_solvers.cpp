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

#include "lipsel/random.hpp"
#include "lipsel/solvers.hpp"

using namespace lipsel;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(SolveLp, OneConstraint) {
  LinearProgram lp(1);
  lp.objective[0] = 1.0;
  lp.add_ge(vec({1.0}), 1.0);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(SolveLp, ContradictoryBounds) {
  LinearProgram lp(1);
  lp.add_le(vec({1.0}), -1.0);
  lp.add_ge(vec({1.0}), 1.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kInfeasible);
}

TEST(SolveLp, UnboundedRay) {
  LinearProgram lp(1);
  lp.objective[0] = -1.0;
  lp.add_ge(vec({1.0}), 0.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kUnbounded);
}

TEST(SolveLp, DimensionMismatchIsInputError) {
  LinearProgram lp(2);
  lp.add_le(vec({1.0}), 1.0);
  EXPECT_THROW(solve_lp(lp), InputError);
}

TEST(SolveLp, EqualityAndNonnegativeVariables) {
  // min x + 2y s.t. x + y = 3, x <= 1, x, y >= 0  ->  x = 1, y = 2.
  LinearProgram lp(2);
  lp.objective = vec({1.0, 2.0});
  lp.nonnegative = {true, true};
  lp.add_eq(vec({1.0, 1.0}), 3.0);
  lp.add_le(vec({1.0, 0.0}), 1.0);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 2.0, 1e-12);
}

TEST(SolveLp, DegenerateCycleExampleTerminates) {
  // Beale's cycling example; Bland's rule must terminate at value -1/20.
  LinearProgram lp(4);
  lp.objective = vec({-0.75, 150.0, -0.02, 6.0});
  lp.nonnegative = {true, true, true, true};
  lp.add_le(vec({0.25, -60.0, -0.04, 9.0}), 0.0);
  lp.add_le(vec({0.5, -90.0, -0.02, 3.0}), 0.0);
  lp.add_le(vec({0.0, 0.0, 1.0, 0.0}), 1.0);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.value, -0.05, 1e-12);
}

TEST(SolveLp, RandomFeasibleProgramsAreFeasibleAndOptimal) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.integer(1, 20);
    const int m = rng.integer(1, 60);
    // Feasible by construction: rows satisfied at a hidden point, plus a box.
    const Vector hidden = rng.uniform_vector(n, -1, 1);
    LinearProgram lp(n);
    lp.objective = rng.normal_vector(n);
    for (int i = 0; i < m; ++i) {
      const Vector row = rng.normal_vector(n);
      lp.add_le(row, row.dot(hidden) + rng.uniform(0.0, 1.0));
    }
    for (int j = 0; j < n; ++j) {
      Vector e = Vector::Zero(n);
      e[j] = 1.0;
      lp.add_le(e, 5.0);
      lp.add_ge(e, -5.0);
    }
    const LpResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::kOptimal) << "trial " << trial;
    EXPECT_LE(lp_violation(lp, r.x), 1e-9) << "trial " << trial;
    EXPECT_NEAR(r.value, lp.objective.dot(r.x), 1e-12);
    // The hidden point is feasible, so it cannot beat the optimum.
    EXPECT_LE(r.value, lp.objective.dot(hidden) + 1e-9);
  }
}

TEST(SolveLp, Deterministic) {
  Rng rng(3);
  LinearProgram lp(5);
  lp.objective = rng.normal_vector(5);
  for (int i = 0; i < 12; ++i) lp.add_le(rng.normal_vector(5), 1.0);
  const LpResult a = solve_lp(lp), b = solve_lp(lp);
  ASSERT_EQ(a.status, b.status);
  if (a.status == LpStatus::kOptimal) EXPECT_EQ(a.x, b.x);
}

TEST(FmEliminate, IntervalSum) {
  // |t - s| <= 1, |s| <= 1, eliminate s -> |t| <= 2.
  InequalitySystem sys(2, true);
  sys.add_pair(vec({1.0, -1.0}), 1.0);
  sys.add_pair(vec({0.0, 1.0}), 1.0);
  const InequalitySystem out = fm_eliminate(sys, {1});
  ASSERT_EQ(out.num_variables, 1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out.symmetric);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(out.rhs[i] / std::abs(out.rows[i][0]), 2.0, 1e-12);
}

TEST(FmEliminate, SingleCombination) {
  InequalitySystem sys(2);
  sys.add(vec({1.0, 1.0}), 0.0);
  sys.add(vec({0.0, -1.0}), 0.0);
  const InequalitySystem out = fm_eliminate(sys, {1});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GT(out.rows[0][0], 0.0);
  EXPECT_NEAR(out.rhs[0], 0.0, 1e-12);
}

TEST(FmEliminate, SlabOfLineSlicedByOrthogonalLine) {
  // U2 = span(e1) in R^2 with slab half-thickness 2; U1 = span(e2) with
  // parameter t, U2 parameter s: |(0 - s)| <= 2, |(t - 0)| <= 2.
  InequalitySystem sys(2, true);
  sys.add_pair(vec({0.0, -1.0}), 2.0);
  sys.add_pair(vec({1.0, 0.0}), 2.0);
  const InequalitySystem out = fm_eliminate(sys, {1});
  // Grid membership oracle: t in [-2, 2].
  for (int i = -40; i <= 40; ++i) {
    const double t = 0.1 * i + 0.013;
    EXPECT_EQ(out.contains(vec({t}), 1e-12), std::abs(t) <= 2.0) << t;
  }
}

TEST(FmEliminate, EmptyProjectionIsMarker) {
  InequalitySystem sys(2);
  sys.add(vec({0.0, 1.0}), -1.0);
  sys.add(vec({0.0, -1.0}), -1.0);
  const InequalitySystem out = fm_eliminate(sys, {1});
  EXPECT_TRUE(out.is_empty_marker());
}

TEST(FmEliminate, RandomProjectionMatchesLpExtension) {
  Rng rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const int nt = rng.integer(1, 3), ns = rng.integer(1, 2);
    const int n = nt + ns;
    const bool sym = rng.coin();
    InequalitySystem sys(n, sym);
    const int m = rng.integer(n + 1, 8);
    for (int i = 0; i < m; ++i) {
      const Vector a = rng.normal_vector(n);
      if (sym)
        sys.add_pair(a, rng.uniform(0.2, 2.0));
      else
        sys.add(a, rng.uniform(0.2, 2.0));
    }
    std::vector<int> elim;
    for (int k = 0; k < ns; ++k) elim.push_back(nt + k);
    const InequalitySystem proj = fm_eliminate(sys, elim);
    EXPECT_EQ(proj.symmetric, sym);
    for (int s = 0; s < 1000; ++s) {
      const Vector t = rng.uniform_vector(nt, -3, 3);
      LinearProgram lp(ns);
      for (std::size_t i = 0; i < sys.size(); ++i)
        lp.add_le(sys.rows[i].tail(ns), sys.rhs[i] - sys.rows[i].head(nt).dot(t));
      const bool extends = solve_lp(lp).status == LpStatus::kOptimal;
      // Skip points within rounding distance of the boundary.
      double slack = kInf;
      for (std::size_t i = 0; i < proj.size(); ++i)
        slack = std::min(slack, std::abs(proj.rhs[i] - proj.rows[i].dot(t)));
      if (slack < 1e-7) continue;
      EXPECT_EQ(proj.contains(t, 0.0), extends) << "trial " << trial << " sample " << s;
    }
  }
}

TEST(RemoveRedundant, DominatedRow) {
  InequalitySystem sys(1);
  sys.add(vec({1.0}), 1.0);
  sys.add(vec({1.0}), 2.0);
  const InequalitySystem out = remove_redundant(sys);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out.rhs[0], 1.0, 1e-15);
}

TEST(RemoveRedundant, Duplicate) {
  InequalitySystem sys(1);
  sys.add(vec({1.0}), 1.0);
  sys.add(vec({-1.0}), 1.0);
  sys.add(vec({1.0}), 1.0);
  EXPECT_EQ(remove_redundant(sys).size(), 2u);
}

TEST(RemoveRedundant, PlantedRedundanciesKeepMembership) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    InequalitySystem sys(3);
    std::vector<std::pair<Vector, double>> base;
    for (int i = 0; i < 6; ++i) {
      const Vector a = rng.normal_vector(3);
      sys.add(a, rng.uniform(0.5, 1.5));
      base.push_back({a, sys.rhs.back()});
    }
    // Planted: positive combinations of two rows, relaxed.
    for (int i = 0; i < 6; ++i) {
      const auto& p = base[static_cast<std::size_t>(rng.integer(0, 5))];
      const auto& q = base[static_cast<std::size_t>(rng.integer(0, 5))];
      const double u = rng.uniform(0.1, 1.0), v = rng.uniform(0.1, 1.0);
      sys.add(u * p.first + v * q.first, u * p.second + v * q.second + rng.uniform(0.0, 0.3));
    }
    const InequalitySystem out = remove_redundant(sys);
    EXPECT_LE(out.size(), 6u);
    for (int s = 0; s < 1000; ++s) {
      const Vector t = rng.uniform_vector(3, -4, 4);
      double slack = kInf;
      for (std::size_t i = 0; i < sys.size(); ++i)
        slack = std::min(slack, std::abs(sys.rhs[i] - sys.rows[i].dot(t)) / max_norm(sys.rows[i]));
      if (slack < 1e-7) continue;
      EXPECT_EQ(out.contains(t, 0.0), sys.contains(t, 0.0));
    }
    // Every kept row is necessary: dropping it enlarges the set.
    for (std::size_t i = 0; i < out.size(); ++i) {
      LinearProgram lp(3);
      lp.objective = -out.rows[i];
      for (std::size_t j = 0; j < out.size(); ++j)
        if (j != i) lp.add_le(out.rows[j], out.rhs[j]);
      const LpResult r = solve_lp(lp);
      EXPECT_TRUE(r.status == LpStatus::kUnbounded || -r.value > out.rhs[i] + 1e-9);
    }
  }
}

namespace {

// Dual of the envelope problem: min over the simplex of
// c |x - A^T w|^2 - e . w, by projected gradient with exact simplex projection.
double envelope_dual(double c, const AffinePieces& p, const Vector& x) {
  const Eigen::Index m = p.slopes.rows();
  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  const double lip = 2.0 * c * p.slopes.squaredNorm() + 1e-12;
  auto project = [](Vector v) {
    Vector s = v;
    std::sort(s.data(), s.data() + s.size(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      cum += s[i];
      const double t = (cum - 1.0) / static_cast<double>(i + 1);
      if (s[i] - t > 0) theta = t;
    }
    return Vector((v.array() - theta).max(0.0));
  };
  for (int it = 0; it < 200000; ++it) {
    const Vector r = x - p.slopes.transpose() * w;
    const Vector grad = -2.0 * c * (p.slopes * r) - p.offsets;
    const Vector next = project(w - grad / lip);
    if ((next - w).cwiseAbs().maxCoeff() < 1e-15) break;
    w = next;
  }
  const Vector r = x - p.slopes.transpose() * w;
  return c * r.squaredNorm() - p.offsets.dot(w);
}

}  // namespace

TEST(EnvelopeQp, SinglePieceClosedForm) {
  AffinePieces p{Matrix(1, 2), Vector(1)};
  p.slopes << 0.3, -0.7;
  p.offsets << 0.25;
  const double c = 1.5;
  const Vector x = vec({0.4, 1.1});
  const EnvelopeQpResult r = solve_envelope_qp(c, p, x);
  const Vector a = p.slopes.row(0).transpose();
  EXPECT_LT(max_dist(r.xi, 2 * c * (x - a)), 1e-12);
  EXPECT_NEAR(r.value, c * (x - a).squaredNorm() - 0.25, 1e-12);
}

TEST(EnvelopeQp, SymmetricPiecesAtMidpoint) {
  // Pieces a = -1, +1, e = 0, c = 1, x = 0: dual min_w (1-2w)^2 -> w = 1/2,
  // xi = 0 (the kink), value 0. Cross-check with bisection on the dual.
  AffinePieces p{Matrix(2, 1), Vector::Zero(2)};
  p.slopes << -1.0, 1.0;
  const EnvelopeQpResult r = solve_envelope_qp(1.0, p, vec({0.0}));
  EXPECT_NEAR(r.xi[0], 0.0, 1e-12);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  // Bisection on the derivative of phi(w) = c (x - (2w - 1))^2 over [0, 1].
  double lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double deriv = 2.0 * (0.0 - (2 * mid - 1)) * (-2.0);
    (deriv > 0 ? hi : lo) = mid;
  }
  const double w = 0.5 * (lo + hi);
  EXPECT_NEAR(r.value, std::pow(0.0 - (2 * w - 1), 2), 1e-12);
}

TEST(EnvelopeQp, NonPositiveCurvatureRejected) {
  AffinePieces p{Matrix::Zero(1, 1), Vector::Zero(1)};
  EXPECT_THROW(solve_envelope_qp(0.0, p, vec({0.0})), InputError);
  EXPECT_THROW(solve_envelope_qp(-1.0, p, vec({0.0})), InputError);
}

TEST(EnvelopeQp, GridSearchAgreesInOneAndTwoDimensions) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(1, 2);
    const int m = rng.integer(1, 5);
    const double c = rng.uniform(0.5, 2.0);
    AffinePieces p{Matrix(m, n), Vector(m)};
    for (int y = 0; y < m; ++y) {
      p.slopes.row(y) = rng.uniform_vector(n, -1, 1).transpose();
      p.offsets[y] = rng.uniform(-1, 1);
    }
    const Vector x = rng.uniform_vector(n, -1, 1);
    const EnvelopeQpResult r = solve_envelope_qp(c, p, x);
    auto objective = [&](const Vector& xi) {
      return x.dot(xi) - xi.squaredNorm() / (4 * c) - (p.slopes * xi + p.offsets).maxCoeff();
    };
    EXPECT_NEAR(objective(r.xi), r.value, 1e-12);
    // Grid over the bounding box of the points 2c(x - a_y), padded.
    Vector lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = hi[i] = 2 * c * (x[i] - p.slopes(0, i));
      for (int y = 1; y < m; ++y) {
        lo[i] = std::min(lo[i], 2 * c * (x[i] - p.slopes(y, i)));
        hi[i] = std::max(hi[i], 2 * c * (x[i] - p.slopes(y, i)));
      }
      lo[i] -= 0.5;
      hi[i] += 0.5;
    }
    const int steps = n == 1 ? 20000 : 400;
    double best = -kInf;
    double h = 0.0;
    Vector xi(n);
    if (n == 1) {
      h = (hi[0] - lo[0]) / steps;
      for (int i = 0; i <= steps; ++i) {
        xi[0] = lo[0] + i * h;
        best = std::max(best, objective(xi));
      }
    } else {
      h = std::max(hi[0] - lo[0], hi[1] - lo[1]) / steps;
      for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j) {
          xi[0] = lo[0] + i * (hi[0] - lo[0]) / steps;
          xi[1] = lo[1] + j * (hi[1] - lo[1]) / steps;
          best = std::max(best, objective(xi));
        }
    }
    EXPECT_GE(r.value, best - 1e-12);
    // Concave, Lipschitz on the box: grid max within slope * step.
    const double slope = max_norm(x) * n + 10.0;
    EXPECT_LE(r.value - best, slope * h * n);
  }
}

TEST(EnvelopeQp, StrongDuality) {
  Rng rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.integer(1, 4);
    const int m = rng.integer(1, 8);
    const double c = rng.uniform(0.2, 3.0);
    AffinePieces p{Matrix(m, n), Vector(m)};
    for (int y = 0; y < m; ++y) {
      p.slopes.row(y) = rng.uniform_vector(n, -2, 2).transpose();
      p.offsets[y] = rng.uniform(-2, 2);
    }
    const Vector x = rng.uniform_vector(n, -2, 2);
    const EnvelopeQpResult r = solve_envelope_qp(c, p, x);
    EXPECT_LE(r.kkt_residual, 1e-8);
    EXPECT_NEAR(r.value, envelope_dual(c, p, x), 1e-7);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-10);
  }
}
