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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Extended reals use IEEE infinity: inf + x = inf and min(inf, x) = x.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_inf(double x) { return std::isinf(x) && x > 0; }

/** Numeric tolerances shared by every module. */
struct Tolerances {
  double feasibility = 1e-9;  ///< LP feasibility and redundancy tests
  double kkt = 1e-8;          ///< envelope QP optimality residual
  double rank = 1e-10;        ///< orthonormality and rank decisions
  double membership = 1e-8;   ///< point-in-flat and slab membership
};

/** Malformed or inconsistent input (dimension mismatch, bad ranges). */
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * A mathematical hypothesis of a construction fails on the given data. The
 * offending vertices (a pair, or a larger subset) are recorded.
 */
class HypothesisFailure : public std::runtime_error {
 public:
  HypothesisFailure(const std::string& what, std::vector<int> subset)
      : std::runtime_error(what), subset_(std::move(subset)) {}

  const std::vector<int>& subset() const { return subset_; }

 private:
  std::vector<int> subset_;
};

/** A pointwise linear system has no solution at sample point `point`. */
class InconsistentSystem : public HypothesisFailure {
 public:
  InconsistentSystem(const std::string& what, int point)
      : HypothesisFailure(what, {point}) {}
};

/** An internal invariant was violated; indicates a numerical or logic bug. */
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline double max_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

inline double max_dist(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/** Ratio num/den with 0/0 = 0, x/0 = inf and x/inf = 0. */
inline double lipschitz_ratio(double num, double den, double zero_tol = 0.0) {
  if (is_inf(den)) return 0.0;
  if (den <= 0.0) return num <= zero_tol ? 0.0 : kInf;
  return num / den;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

inline void ensure(bool ok, const std::string& what) {
  if (!ok) throw InternalError(what);
}

}  // namespace lipsel
