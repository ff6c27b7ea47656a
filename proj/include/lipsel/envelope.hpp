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

// Convex envelopes of minima of quadratics sharing the Hessian 2c I, and the
// C^{1,1} and Kirszbraun extension formulas built on them.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lipsel/core.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/selection.hpp"
#include "lipsel/solvers.hpp"
#include "lipsel/whitney.hpp"

namespace lipsel {

/** q(w) = c |w|_2^2 + <beta, w> + gamma. */
struct QuadraticPiece {
  Vector beta;
  double gamma = 0.0;
};

/** h = min over pieces; all pieces share the curvature c. */
struct QuadraticFamily {
  double c = 1.0;
  int dim = 0;
  std::vector<QuadraticPiece> pieces;

  void validate() const {
    require(std::isfinite(c) && c > 0, "QuadraticFamily: curvature must be positive");
    require(!pieces.empty(), "QuadraticFamily: no pieces");
    for (const auto& p : pieces)
      require(p.beta.size() == dim && p.beta.allFinite() && std::isfinite(p.gamma),
              "QuadraticFamily: malformed piece");
  }

  double piece(std::size_t y, const Vector& w) const {
    return c * w.squaredNorm() + pieces[y].beta.dot(w) + pieces[y].gamma;
  }

  double h(const Vector& w) const {
    double best = kInf;
    for (std::size_t y = 0; y < pieces.size(); ++y) best = std::min(best, piece(y, w));
    return best;
  }

  /**
   * The conjugate is |xi|^2/(4c) + max_y(<a_y, xi> + e_y) with
   * a_y = -beta_y/(2c) and e_y = |beta_y|^2/(4c) - gamma_y.
   */
  AffinePieces conjugate_pieces() const {
    AffinePieces out;
    const Eigen::Index m = static_cast<Eigen::Index>(pieces.size());
    out.slopes.resize(m, dim);
    out.offsets.resize(m);
    for (Eigen::Index y = 0; y < m; ++y) {
      const auto& p = pieces[static_cast<std::size_t>(y)];
      out.slopes.row(y) = (-p.beta / (2.0 * c)).transpose();
      out.offsets[y] = p.beta.squaredNorm() / (4.0 * c) - p.gamma;
    }
    return out;
  }
};

/** |(f, g)|_{X,1,1}: the jet seminorm with omega(t) = t. */
inline double c11_seminorm(const Jet1& j) {
  Jet1 lin = j;
  lin.omega = Modulus::power(1.0);
  return jet_seminorm(lin).seminorm;
}

/**
 * Pieces of h(x) = min_y (f(y) + <g(y), x - y> + (c/2)|x - y|_2^2) + (c/2)|x|_2^2
 * with c = sqrt(n) M.
 */
inline QuadraticFamily family_from_jet(const Jet1& j, double lipschitz) {
  detail::validate_jet(j);
  require(j.size() >= 1, "family_from_jet: empty jet");
  require(std::isfinite(lipschitz) && lipschitz > 0, "family_from_jet: M must be positive");
  const double semi = c11_seminorm(j);
  require(lipschitz >= semi * (1.0 - 1e-12),
          "family_from_jet: M = " + std::to_string(lipschitz) + " is below the jet seminorm " + std::to_string(semi));
  QuadraticFamily fam;
  fam.dim = j.dim();
  fam.c = std::sqrt(static_cast<double>(fam.dim)) * lipschitz;
  for (int y = 0; y < j.size(); ++y) {
    const Vector& p = j.points[y];
    const Vector& g = j.gradients[y];
    fam.pieces.push_back({g - fam.c * p, j.values[y] - g.dot(p) + 0.5 * fam.c * p.squaredNorm()});
  }
  return fam;
}

struct EnvelopeValue {
  double value = 0.0;  ///< conv(h)(w)
  Vector grad;         ///< unique maximizer of the conjugate problem
  double kkt_residual = 0.0;
};

/** conv(h)(w) = h**(w) and its gradient, by the envelope QP. */
inline EnvelopeValue envelope_eval(const QuadraticFamily& fam, const Vector& w, const Tolerances& tol = {}) {
  fam.validate();
  require(w.size() == fam.dim && w.allFinite(), "envelope_eval: query dimension differs from family");
  const EnvelopeQpResult r = solve_envelope_qp(fam.c, fam.conjugate_pieces(), w, tol);
  return {r.value, r.xi, r.kkt_residual};
}

struct C11Value {
  double value = 0.0;
  Vector grad;
};

/** F = conv(h) - (c/2)|x|_2^2 and its gradient at each query. */
inline std::vector<C11Value> extend_c11(const Jet1& j, double lipschitz, const std::vector<Vector>& queries,
                                        const Tolerances& tol = {}, int threads = 1) {
  const QuadraticFamily fam = family_from_jet(j, lipschitz);
  const AffinePieces pieces = fam.conjugate_pieces();
  std::vector<C11Value> out(queries.size());
  detail::parallel_for(queries.size(), threads, [&](std::size_t q) {
    const Vector& x = queries[q];
    require(x.size() == fam.dim && x.allFinite(), "extend_c11: query dimension differs from jet");
    const EnvelopeQpResult r = solve_envelope_qp(fam.c, pieces, x, tol);
    out[q] = {r.value - 0.5 * fam.c * x.squaredNorm(), r.xi - fam.c * x};
  });
  return out;
}

/** Euclidean Lipschitz constant of f on X. */
inline double euclidean_lipschitz(const std::vector<Vector>& pts, const std::vector<Vector>& vals) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, lipschitz_ratio((vals[i] - vals[j]).norm(), (pts[i] - pts[j]).norm()));
  return best;
}

/**
 * Joint family on R^{n+m} with curvature M and pieces
 * beta_z = (-M z, f(z)), gamma_z = (M/2)|z|_2^2.
 */
inline QuadraticFamily kirszbraun_family(const std::vector<Vector>& pts, const std::vector<Vector>& vals,
                                         double lipschitz) {
  require(!pts.empty() && pts.size() == vals.size(), "kirszbraun: one value per point required");
  require(std::isfinite(lipschitz) && lipschitz > 0, "kirszbraun: M must be positive");
  const Eigen::Index n = pts.front().size(), m = vals.front().size();
  for (std::size_t i = 0; i < pts.size(); ++i)
    require(pts[i].size() == n && vals[i].size() == m && pts[i].allFinite() && vals[i].allFinite(),
            "kirszbraun: inconsistent dimensions");
  const double lip = euclidean_lipschitz(pts, vals);
  require(lipschitz >= lip * (1.0 - 1e-12),
          "kirszbraun: M = " + std::to_string(lipschitz) + " is below the Lipschitz constant " + std::to_string(lip));
  QuadraticFamily fam;
  fam.c = lipschitz;
  fam.dim = static_cast<int>(n + m);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vector beta(n + m);
    beta << -lipschitz * pts[i], vals[i];
    fam.pieces.push_back({beta, 0.5 * lipschitz * pts[i].squaredNorm()});
  }
  return fam;
}

/** F(x) = the R^m block of grad conv(g)(x, 0). */
inline std::vector<Vector> kirszbraun_extend(const std::vector<Vector>& pts, const std::vector<Vector>& vals,
                                             double lipschitz, const std::vector<Vector>& queries,
                                             const Tolerances& tol = {}, int threads = 1) {
  const QuadraticFamily fam = kirszbraun_family(pts, vals, lipschitz);
  const AffinePieces pieces = fam.conjugate_pieces();
  const Eigen::Index n = pts.front().size(), m = vals.front().size();
  std::vector<Vector> out(queries.size());
  detail::parallel_for(queries.size(), threads, [&](std::size_t q) {
    require(queries[q].size() == n && queries[q].allFinite(), "kirszbraun_extend: query dimension differs");
    Vector w = Vector::Zero(n + m);
    w.head(n) = queries[q];
    out[q] = solve_envelope_qp(fam.c, pieces, w, tol).xi.tail(m);
  });
  return out;
}

}  // namespace lipsel
