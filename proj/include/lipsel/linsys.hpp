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

// Hoelder solutions of pointwise linear systems A(x) g(x) = b(x) on a finite
// sample, by selection from the per-point solution flats.

#pragma once

#include <string>
#include <vector>

#include <Eigen/SVD>

#include "lipsel/core.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/selection.hpp"

namespace lipsel {

struct SampledSystem {
  std::vector<Vector> points;
  std::vector<Matrix> a;  ///< N x M at each point
  std::vector<Vector> b;  ///< N at each point
  Modulus omega = Modulus::power(1.0);

  int size() const { return static_cast<int>(points.size()); }
  int unknowns() const { return a.empty() ? 0 : static_cast<int>(a.front().cols()); }

  void validate() const {
    require(!points.empty(), "SampledSystem: no points");
    require(a.size() == points.size() && b.size() == points.size(), "SampledSystem: one A and b per point");
    const Eigen::Index n = points.front().size(), rows = a.front().rows(), cols = a.front().cols();
    require(n >= 1 && cols >= 1, "SampledSystem: empty dimensions");
    for (int i = 0; i < size(); ++i) {
      require(points[i].size() == n && points[i].allFinite(), "SampledSystem: inconsistent point " + std::to_string(i));
      require(a[i].rows() == rows && a[i].cols() == cols && a[i].allFinite(),
              "SampledSystem: inconsistent matrix at point " + std::to_string(i));
      require(b[i].size() == rows && b[i].allFinite(), "SampledSystem: inconsistent right-hand side at point " +
                                                           std::to_string(i));
    }
  }
};

/** Residual allowed for A x = b before the system counts as inconsistent. */
inline double system_tolerance(const Vector& b) { return 1e-8 * (1.0 + max_norm(b)); }

/**
 * Solution set of A x = b: minimum-norm solution plus an orthonormal
 * null-space basis, both from a full SVD with relative rank threshold
 * 1e-10. `point` names the sample in the error.
 */
inline AffineSubspace solution_flat(const Matrix& a, const Vector& b, int point = -1, double rank_tol = 1e-10) {
  require(a.rows() == b.size(), "solution_flat: A and b have different row counts");
  const Eigen::Index m = a.cols();
  if (a.rows() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    if (b.size() > 0 && max_norm(b) > system_tolerance(b))
      throw InconsistentSystem("solution_flat: inconsistent system at point " + std::to_string(point), point);
    return AffineSubspace::whole_space(static_cast<int>(m));
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(rank_tol);
  const Eigen::Index r = svd.rank();
  const Vector x0 = svd.solve(b);
  if (max_norm(a * x0 - b) > system_tolerance(b))
    throw InconsistentSystem("solution_flat: inconsistent system at point " + std::to_string(point), point);
  return AffineSubspace(x0, svd.matrixV().rightCols(m - r));
}

struct HolderSolution {
  std::vector<Vector> values;
  double seminorm = 0.0;  ///< omega-Hoelder, max-norm on both sides
  double max_residual = 0.0;
  std::vector<AffineSubspace> flats;
  Selection selection;
};

/** rho(x, y) = omega(|x - y|_inf) on the sample. */
inline PseudometricSpace holder_space(const std::vector<Vector>& points, const Modulus& omega) {
  const int np = static_cast<int>(points.size());
  Matrix d = Matrix::Zero(np, np);
  for (int i = 0; i < np; ++i)
    for (int j = i + 1; j < np; ++j) d(i, j) = d(j, i) = omega(max_dist(points[i], points[j]));
  return PseudometricSpace(d);
}

/** Selection from the solution flats over the complete graph with k = M. */
inline HolderSolution solve_holder_system(const SampledSystem& s, const SelectOptions& opt = {}) {
  s.validate();
  HolderSolution out;
  out.flats.resize(s.points.size());
  detail::parallel_for(s.points.size(), opt.threads, [&](std::size_t i) {
    out.flats[i] = solution_flat(s.a[i], s.b[i], static_cast<int>(i), opt.tol.rank);
  });
  AffineMap am{full_graph(holder_space(s.points, s.omega)), out.flats, s.unknowns()};
  out.selection = select_affine(am, opt);
  out.values = out.selection.points;
  out.seminorm = out.selection.seminorm;
  for (int i = 0; i < s.size(); ++i) {
    const double res = max_norm(s.a[i] * out.values[i] - s.b[i]);
    out.max_residual = std::max(out.max_residual, res);
    ensure(res <= system_tolerance(s.b[i]) * (1.0 + max_norm(out.values[i])),
           "solve_holder_system: residual " + std::to_string(res) + " at point " + std::to_string(i));
  }
  return out;
}

}  // namespace lipsel
