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
#include <string>
#include <vector>

#include "lipsel/core.hpp"

namespace lipsel {

// ---------------------------------------------------------------------------
// Linear programming
// ---------------------------------------------------------------------------

enum class Relation { kLessEqual, kEqual };

struct LinearConstraint {
  Vector row;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

/**
 * minimize objective . x subject to the constraints. Variables are free
 * unless flagged in `nonnegative` (which may be left empty).
 */
struct LinearProgram {
  int num_variables = 0;
  Vector objective;
  std::vector<LinearConstraint> constraints;
  std::vector<bool> nonnegative;

  LinearProgram() = default;
  explicit LinearProgram(int n) : num_variables(n), objective(Vector::Zero(n)) {}

  void add_le(Vector row, double rhs) {
    constraints.push_back({std::move(row), Relation::kLessEqual, rhs});
  }
  void add_ge(const Vector& row, double rhs) {
    constraints.push_back({-row, Relation::kLessEqual, -rhs});
  }
  void add_eq(Vector row, double rhs) {
    constraints.push_back({std::move(row), Relation::kEqual, rhs});
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double value = 0.0;
};

namespace detail {

// Dense two-phase tableau simplex. Bland's rule on both the entering and the
// leaving choice makes the pivot sequence a function of the input only.
class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), w_(cols + 1), t_((rows) * (cols + 1), 0.0),
                                z_(cols + 1, 0.0), basis_(rows, -1) {}

  double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * w_ + j]; }
  double at(int i, int j) const { return t_[static_cast<std::size_t>(i) * w_ + j]; }
  double& rhs(int i) { return at(i, n_); }
  double rhs(int i) const { return at(i, n_); }
  std::vector<double>& cost() { return z_; }
  std::vector<int>& basis() { return basis_; }
  int rows() const { return m_; }
  int cols() const { return n_; }

  void pivot(int r, int c) {
    double* pr = &t_[static_cast<std::size_t>(r) * w_];
    const double inv = 1.0 / pr[c];
    for (int j = 0; j < w_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[static_cast<std::size_t>(i) * w_];
      const double f = pi[c];
      if (f == 0.0) continue;
      for (int j = 0; j < w_; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
    const double f = z_[c];
    if (f != 0.0) {
      for (int j = 0; j < w_; ++j) z_[j] -= f * pr[j];
      z_[c] = 0.0;
    }
    basis_[r] = c;
  }

  void snapshot() { orig_ = t_; }

  // Rebuilds the tableau as B^-1 times the snapshot, where B holds the
  // snapshot columns of the current basis. Returns false if B is singular.
  bool refactor() {
    Matrix b(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (int k = 0; k < m_; ++k) b(i, k) = orig_[static_cast<std::size_t>(i) * w_ + basis_[k]];
    const Eigen::FullPivLU<Matrix> lu(b);
    if (!lu.isInvertible()) return false;
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMatrix> orig(orig_.data(), m_, w_);
    Eigen::Map<RowMatrix>(t_.data(), m_, w_) = lu.solve(Matrix(orig));
    for (int k = 0; k < m_; ++k)
      for (int i = 0; i < m_; ++i) at(i, basis_[k]) = i == k ? 1.0 : 0.0;
    return true;
  }

  // Reduced costs c_j - c_B^T B^-1 a_j, and minus the objective in the last slot.
  void set_cost(const std::vector<double>& c) {
    for (int j = 0; j < n_; ++j) z_[j] = c[j];
    z_[n_] = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < w_; ++j) z_[j] -= cb * at(i, j);
    }
  }

  // Runs simplex iterations on the current cost row; columns >= `limit` never
  // enter. Columns price in below -cost_eps; entries at or below pivot_eps
  // are never pivoted on. Returns false when the problem is unbounded in the
  // entering column.
  bool optimize(int limit, double cost_eps, double pivot_eps) {
    const int max_iter = 50000 + 50 * (m_ + n_);
    for (int iter = 0; iter < max_iter; ++iter) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (z_[j] < -cost_eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      double best = kInf;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a > pivot_eps) best = std::min(best, std::max(rhs(i), 0.0) / a);
      }
      if (is_inf(best)) return false;
      int leave = -1;
      const double tie = best + 1e-12 * (1.0 + best);
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= pivot_eps || std::max(rhs(i), 0.0) / a > tie) continue;
        if (leave < 0 || basis_[i] < basis_[leave]) leave = i;
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw InternalError("simplex iteration limit exceeded");
  }

 private:
  int m_;
  int n_;
  int w_;
  std::vector<double> t_;
  std::vector<double> z_;
  std::vector<int> basis_;
  std::vector<double> orig_;
};

}  // namespace detail

/** Solves a dense LP with a deterministic two-phase simplex. */
inline LpResult solve_lp(const LinearProgram& lp, const Tolerances& tol = {}) {
  const int nv = lp.num_variables;
  require(nv >= 0, "solve_lp: negative variable count");
  require(lp.objective.size() == nv, "solve_lp: objective length differs from variable count");
  require(lp.nonnegative.empty() || static_cast<int>(lp.nonnegative.size()) == nv,
          "solve_lp: nonnegativity flags length differs from variable count");
  for (const auto& con : lp.constraints) {
    require(con.row.size() == nv, "solve_lp: constraint row length differs from variable count");
    require(std::isfinite(con.rhs), "solve_lp: non-finite right-hand side");
    require(con.row.allFinite(), "solve_lp: non-finite constraint coefficient");
  }
  require(lp.objective.allFinite(), "solve_lp: non-finite objective coefficient");

  // Column layout: structural (x+ and, for free variables, x-), slacks, artificials.
  std::vector<int> pos(nv), neg(nv, -1);
  int ncol = 0;
  for (int j = 0; j < nv; ++j) {
    pos[j] = ncol++;
    const bool nonneg = !lp.nonnegative.empty() && lp.nonnegative[j];
    if (!nonneg) neg[j] = ncol++;
  }
  const int m = static_cast<int>(lp.constraints.size());
  std::vector<int> slack(m, -1);
  for (int i = 0; i < m; ++i)
    if (lp.constraints[i].relation == Relation::kLessEqual) slack[i] = ncol++;
  const int nreal = ncol;
  std::vector<int> art(m, -1);
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    const auto& con = lp.constraints[i];
    if (con.rhs < 0) sign[i] = -1.0;
    const bool slack_basic = con.relation == Relation::kLessEqual && sign[i] > 0;
    if (!slack_basic) art[i] = ncol++;
  }

  detail::Tableau tab(m, ncol);
  for (int i = 0; i < m; ++i) {
    const auto& con = lp.constraints[i];
    for (int j = 0; j < nv; ++j) {
      const double a = sign[i] * con.row[j];
      tab.at(i, pos[j]) = a;
      if (neg[j] >= 0) tab.at(i, neg[j]) = -a;
    }
    if (slack[i] >= 0) tab.at(i, slack[i]) = sign[i];
    tab.rhs(i) = sign[i] * con.rhs;
    if (art[i] >= 0) {
      tab.at(i, art[i]) = 1.0;
      tab.basis()[i] = art[i];
    } else {
      tab.basis()[i] = slack[i];
    }
  }

  // Pivots on entries below 1e-7 lose too many digits on near-parallel columns.
  const double cost_eps = 1e-9, pivot_eps = 1e-7;
  double bscale = 1.0;
  for (const auto& con : lp.constraints) bscale = std::max(bscale, std::abs(con.rhs));

  tab.snapshot();

  // Phase 1: minimize the sum of artificials. If it stalls short of zero,
  // the tableau is rebuilt from the snapshot once and the phase resumed.
  std::vector<double> art_cost(ncol, 0.0);
  bool any_art = false;
  for (int i = 0; i < m; ++i)
    if (art[i] >= 0) {
      any_art = true;
      art_cost[art[i]] = 1.0;
    }
  auto& z = tab.cost();
  if (any_art) {
    tab.set_cost(art_cost);
    tab.optimize(nreal, cost_eps, pivot_eps);
    if (-z[ncol] > tol.feasibility * bscale && tab.refactor()) {
      tab.set_cost(art_cost);
      tab.optimize(nreal, cost_eps, pivot_eps);
    }
    if (-z[ncol] > tol.feasibility * bscale) return {LpStatus::kInfeasible, Vector(), 0.0};
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < nreal) continue;
      int best = -1;
      double mag = pivot_eps;
      for (int j = 0; j < nreal; ++j) {
        if (std::abs(tab.at(i, j)) > mag) {
          mag = std::abs(tab.at(i, j));
          best = j;
        }
      }
      if (best >= 0) tab.pivot(i, best);
    }
  }

  // Phase 2.
  std::vector<double> cost(ncol, 0.0);
  for (int j = 0; j < nv; ++j) {
    cost[pos[j]] = lp.objective[j];
    if (neg[j] >= 0) cost[neg[j]] = -lp.objective[j];
  }
  tab.set_cost(cost);
  if (!tab.optimize(nreal, cost_eps, pivot_eps)) return {LpStatus::kUnbounded, Vector(), -kInf};

  std::vector<double> colval(ncol, 0.0);
  for (int i = 0; i < m; ++i) colval[tab.basis()[i]] = std::max(tab.rhs(i), 0.0);
  LpResult res;
  res.status = LpStatus::kOptimal;
  res.x = Vector::Zero(nv);
  for (int j = 0; j < nv; ++j) res.x[j] = colval[pos[j]] - (neg[j] >= 0 ? colval[neg[j]] : 0.0);
  res.value = lp.objective.dot(res.x);
  return res;
}

/** Largest constraint violation of x (0 when feasible). */
inline double lp_violation(const LinearProgram& lp, const Vector& x) {
  double v = 0.0;
  for (const auto& con : lp.constraints) {
    const double lhs = con.row.dot(x);
    if (con.relation == Relation::kLessEqual)
      v = std::max(v, lhs - con.rhs);
    else
      v = std::max(v, std::abs(lhs - con.rhs));
  }
  for (std::size_t j = 0; j < lp.nonnegative.size(); ++j)
    if (lp.nonnegative[j]) v = std::max(v, -x[static_cast<Eigen::Index>(j)]);
  return v;
}

// ---------------------------------------------------------------------------
// Polyhedral elimination
// ---------------------------------------------------------------------------

/**
 * Rows (a, c) meaning <a, t> <= c. When `symmetric` is set every row (a, c)
 * has its mirror (-a, c) in the list.
 */
struct InequalitySystem {
  int num_variables = 0;
  std::vector<Vector> rows;
  std::vector<double> rhs;
  bool symmetric = false;

  InequalitySystem() = default;
  explicit InequalitySystem(int n, bool sym = false) : num_variables(n), symmetric(sym) {}

  std::size_t size() const { return rows.size(); }

  void add(Vector a, double c) {
    require(a.size() == num_variables, "InequalitySystem: row length differs from variable count");
    rows.push_back(std::move(a));
    rhs.push_back(c);
  }

  /** Adds |<a, t>| <= c as the row pair (a, c), (-a, c). */
  void add_pair(const Vector& a, double c) {
    add(a, c);
    add(-a, c);
  }

  bool contains(const Vector& t, double tol = 1e-9) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].dot(t) > rhs[i] + tol) return false;
    return true;
  }

  /** True for the canonical empty-set encoding 0 <= -1. */
  bool is_empty_marker() const {
    return rows.size() == 1 && rhs[0] < 0 && (rows[0].size() == 0 || rows[0].isZero(0.0));
  }

  static InequalitySystem empty_set(int n, bool sym = false) {
    InequalitySystem s(n, sym);
    s.rows.push_back(Vector::Zero(n));
    s.rhs.push_back(-1.0);
    return s;
  }
};

namespace detail {

inline constexpr double kCoeffZero = 1e-12;

// Scales each row to unit max-norm, drops trivially satisfied rows and
// merges duplicates. In symmetric mode rows are merged by their sign class
// and re-emitted as exact mirror pairs.
inline InequalitySystem canonicalize(const InequalitySystem& in, double tol) {
  const int n = in.num_variables;
  InequalitySystem out(n, in.symmetric);
  std::vector<Vector> keys;
  std::vector<double> vals;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    Vector a = in.rows[i];
    double c = in.rhs[i];
    const double s = max_norm(a);
    if (s <= kCoeffZero) {
      if (c < -tol) return InequalitySystem::empty_set(n, in.symmetric);
      continue;
    }
    a /= s;
    c /= s;
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (std::abs(a[j]) < kCoeffZero) a[j] = 0.0;
    if (in.symmetric) {
      Eigen::Index first = 0;
      while (a[first] == 0.0) ++first;
      if (a[first] < 0) a = -a;
    }
    bool merged = false;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (max_dist(keys[k], a) <= 1e-12) {
        vals[k] = std::min(vals[k], c);
        merged = true;
        break;
      }
    }
    if (!merged) {
      keys.push_back(std::move(a));
      vals.push_back(c);
    }
  }
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (in.symmetric) {
      if (vals[k] < -tol) return InequalitySystem::empty_set(n, true);
      out.add_pair(keys[k], std::max(vals[k], 0.0));
    } else {
      out.add(keys[k], vals[k]);
    }
  }
  return out;
}

}  // namespace detail

/**
 * Removes every row implied by the others. Each row is certified by an LP
 * maximizing its left-hand side over the remaining rows; mirror pairs of a
 * symmetric system are tested and removed together.
 */
inline InequalitySystem remove_redundant(const InequalitySystem& sys, const Tolerances& tol = {}) {
  const int n = sys.num_variables;
  InequalitySystem cur = detail::canonicalize(sys, tol.feasibility);
  if (cur.is_empty_marker()) return cur;
  if (cur.rows.empty()) return cur;

  // Emptiness check (symmetric systems with c >= 0 always contain 0).
  if (!cur.symmetric) {
    LinearProgram lp(n);
    for (std::size_t i = 0; i < cur.rows.size(); ++i) lp.add_le(cur.rows[i], cur.rhs[i]);
    if (solve_lp(lp, tol).status == LpStatus::kInfeasible)
      return InequalitySystem::empty_set(n, cur.symmetric);
  }

  const std::size_t stride = cur.symmetric ? 2 : 1;
  const std::size_t groups = cur.rows.size() / stride;
  std::vector<bool> keep(groups, true);
  for (std::size_t g = 0; g < groups; ++g) {
    const Vector& a = cur.rows[g * stride];
    const double c = cur.rhs[g * stride];
    LinearProgram lp(n);
    lp.objective = -a;
    for (std::size_t h = 0; h < groups; ++h) {
      if (h == g || !keep[h]) continue;
      for (std::size_t r = 0; r < stride; ++r) lp.add_le(cur.rows[h * stride + r], cur.rhs[h * stride + r]);
    }
    const LpResult res = solve_lp(lp, tol);
    if (res.status != LpStatus::kOptimal) continue;
    if (-res.value <= c + tol.feasibility * std::max(1.0, std::abs(c))) keep[g] = false;
  }
  InequalitySystem out(n, cur.symmetric);
  for (std::size_t g = 0; g < groups; ++g) {
    if (!keep[g]) continue;
    for (std::size_t r = 0; r < stride; ++r) out.add(cur.rows[g * stride + r], cur.rhs[g * stride + r]);
  }
  return out;
}

/**
 * Projects the polyhedron onto the variables not listed in `vars` by
 * Fourier-Motzkin elimination. Remaining variables keep their relative
 * order. An empty projection is returned as the single row 0 <= -1.
 */
inline InequalitySystem fm_eliminate(const InequalitySystem& sys, std::vector<int> vars,
                                     const Tolerances& tol = {}) {
  for (int v : vars)
    require(v >= 0 && v < sys.num_variables, "fm_eliminate: variable index out of range");
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());

  InequalitySystem cur = detail::canonicalize(sys, tol.feasibility);
  // Eliminate from the highest index down so lower indices stay valid.
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
    const int v = *it;
    const int n = cur.num_variables;
    if (cur.is_empty_marker()) {
      return InequalitySystem::empty_set(sys.num_variables - static_cast<int>(vars.size()),
                                         sys.symmetric);
    }
    auto drop = [&](const Vector& a) {
      Vector out(n - 1);
      for (int j = 0, k = 0; j < n; ++j)
        if (j != v) out[k++] = a[j];
      return out;
    };
    InequalitySystem next(n - 1, cur.symmetric);
    std::vector<std::size_t> plus, minus;
    for (std::size_t i = 0; i < cur.rows.size(); ++i) {
      const double a = cur.rows[i][v];
      if (a > detail::kCoeffZero)
        plus.push_back(i);
      else if (a < -detail::kCoeffZero)
        minus.push_back(i);
      else
        next.add(drop(cur.rows[i]), cur.rhs[i]);
    }
    for (std::size_t p : plus) {
      const double ap = cur.rows[p][v];
      for (std::size_t q : minus) {
        const double aq = -cur.rows[q][v];
        Vector row = cur.rows[p] / ap + cur.rows[q] / aq;
        next.add(drop(row), cur.rhs[p] / ap + cur.rhs[q] / aq);
      }
    }
    cur = remove_redundant(next, tol);
  }
  if (cur.is_empty_marker())
    return InequalitySystem::empty_set(sys.num_variables - static_cast<int>(vars.size()), sys.symmetric);
  if (vars.empty()) cur = remove_redundant(cur, tol);
  return cur;
}

// ---------------------------------------------------------------------------
// Envelope QP
// ---------------------------------------------------------------------------

/** Affine pieces xi -> <slope_y, xi> + offset_y, one per row. */
struct AffinePieces {
  Matrix slopes;  // m x n
  Vector offsets; // m
};

struct EnvelopeQpResult {
  Vector xi;            ///< unique maximizer
  double value = 0.0;   ///< objective at xi
  Vector weights;       ///< simplex multipliers of the pieces
  double kkt_residual = 0.0;
  int iterations = 0;
};

/**
 * Maximizes <x, xi> - |xi|^2/(4c) - max_y(<a_y, xi> + e_y) over xi.
 *
 * Written as min |xi|^2/(4c) - <x, xi> + tau s.t. <a_y, xi> - tau <= -e_y and
 * solved by a primal active-set method started from the unconstrained
 * maximizer. The multipliers of the pieces sum to one and give the dual
 * point xi = 2c (x - sum_y w_y a_y).
 */
inline EnvelopeQpResult solve_envelope_qp(double c, const AffinePieces& pieces, const Vector& x,
                                          const Tolerances& tol = {}) {
  require(std::isfinite(c) && c > 0, "solve_envelope_qp: curvature must be positive");
  const Eigen::Index m = pieces.slopes.rows();
  const Eigen::Index n = pieces.slopes.cols();
  require(m > 0, "solve_envelope_qp: no affine pieces");
  require(pieces.offsets.size() == m, "solve_envelope_qp: offsets length differs from piece count");
  require(x.size() == n, "solve_envelope_qp: query dimension differs from piece dimension");

  const Matrix& A = pieces.slopes;
  const Vector& e = pieces.offsets;
  Vector xi = 2.0 * c * x;
  Vector lift = A * xi + e;
  Eigen::Index top = 0;
  for (Eigen::Index y = 1; y < m; ++y)
    if (lift[y] > lift[top]) top = y;
  double tau = lift[top];

  std::vector<Eigen::Index> work{top};
  Vector mult;
  const int max_iter = static_cast<int>(20 * (m + n) + 100);
  int iter = 0;
  double scale = 1.0 + max_norm(xi) + std::abs(tau);
  for (; iter < max_iter; ++iter) {
    const Eigen::Index w = static_cast<Eigen::Index>(work.size());
    const Eigen::Index dim = n + 1 + w;
    Matrix K = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      K(i, i) = 1.0 / (2.0 * c);
      rhs[i] = -(xi[i] / (2.0 * c) - x[i]);
    }
    rhs[n] = -1.0;
    for (Eigen::Index k = 0; k < w; ++k) {
      const Eigen::Index y = work[k];
      for (Eigen::Index i = 0; i < n; ++i) {
        K(n + 1 + k, i) = A(y, i);
        K(i, n + 1 + k) = A(y, i);
      }
      K(n + 1 + k, n) = -1.0;
      K(n, n + 1 + k) = -1.0;
    }
    const Vector sol = K.fullPivLu().solve(rhs);
    const Vector p = sol.head(n + 1);
    mult = sol.tail(w);

    if (max_norm(p) <= 1e-13 * scale) {
      Eigen::Index worst = -1;
      for (Eigen::Index k = 0; k < w; ++k)
        if (mult[k] < -1e-12 && (worst < 0 || mult[k] < mult[worst])) worst = k;
      if (worst < 0) break;
      work.erase(work.begin() + worst);
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index y = 0; y < m; ++y) {
      if (std::find(work.begin(), work.end(), y) != work.end()) continue;
      const double rp = A.row(y).dot(p.head(n)) - p[n];
      if (rp <= 1e-14 * scale) continue;
      const double slackv = std::max(0.0, tau - A.row(y).dot(xi) - e[y]);
      const double step = slackv / rp;
      if (step < alpha) {
        alpha = step;
        blocking = y;
      }
    }
    xi += alpha * p.head(n);
    tau += alpha * p[n];
    scale = 1.0 + max_norm(xi) + std::abs(tau);
    if (blocking >= 0) work.push_back(blocking);
  }
  if (iter >= max_iter) throw InternalError("solve_envelope_qp: active-set iteration limit exceeded");

  EnvelopeQpResult out;
  out.iterations = iter;
  out.weights = Vector::Zero(m);
  for (std::size_t k = 0; k < work.size(); ++k) out.weights[work[k]] = mult[static_cast<Eigen::Index>(k)];
  out.xi = xi;
  lift = A * xi + e;
  const double top_val = lift.maxCoeff();
  out.value = x.dot(xi) - xi.squaredNorm() / (4.0 * c) - top_val;

  // KKT residual: stationarity, multiplier sum, sign, complementarity.
  double res = max_norm(xi / (2.0 * c) - x + A.transpose() * out.weights);
  res = std::max(res, std::abs(1.0 - out.weights.sum()));
  for (Eigen::Index y = 0; y < m; ++y) {
    res = std::max(res, -out.weights[y]);
    res = std::max(res, std::abs(out.weights[y]) * (top_val - lift[y]) / (1.0 + std::abs(top_val)));
  }
  out.kkt_residual = res;
  if (!(res <= tol.kkt))
    throw InternalError("solve_envelope_qp: KKT residual " + std::to_string(res) + " above tolerance");

  // The maximizer is a convex combination of the points 2c (x - a_y); check
  // that it lies in their bounding box padded by a factor two.
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = kInf, hi = -kInf;
    for (Eigen::Index y = 0; y < m; ++y) {
      const double pt = 2.0 * c * (x[i] - A(y, i));
      lo = std::min(lo, pt);
      hi = std::max(hi, pt);
    }
    const double mid = 0.5 * (lo + hi);
    const double half = (hi - lo) + 1e-9 * (1.0 + std::abs(mid));
    if (xi[i] < mid - half || xi[i] > mid + half)
      throw InternalError("solve_envelope_qp: maximizer left the gradient bounding box");
  }
  return out;
}

}  // namespace lipsel
