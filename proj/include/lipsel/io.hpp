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

// JSON schema "lipsel/1": readers for every input object and writers for
// results. Infinite values travel as the string "inf". Needs nlohmann/json.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipsel/core.hpp"
#include "lipsel/envelope.hpp"
#include "lipsel/geometry.hpp"
#include "lipsel/linsys.hpp"
#include "lipsel/metricspace.hpp"
#include "lipsel/oracle.hpp"
#include "lipsel/selection.hpp"
#include "lipsel/whitney.hpp"

namespace lipsel::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "lipsel/1";

// ---------------------------------------------------------------- parsing

/** Parses text; syntax errors become InputError with line and column. */
inline json parse(const std::string& text, const std::string& source = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    std::size_t line = 1, col = 1;
    const std::size_t stop = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source + ": malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": " + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_file(const std::string& path) { return parse(read_text(path), path); }

inline const json& field(const json& obj, const char* key) {
  require(obj.is_object(), std::string("expected an object holding '") + key + "'");
  const auto it = obj.find(key);
  require(it != obj.end(), std::string("missing field '") + key + "'");
  return *it;
}

inline bool has(const json& obj, const char* key) { return obj.is_object() && obj.contains(key); }

inline double number(const json& j, const std::string& what) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInf;
  require(j.is_number(), what + ": expected a number or \"inf\"");
  const double v = j.get<double>();
  require(std::isfinite(v), what + ": non-finite number");
  return v;
}

inline double finite_number(const json& j, const std::string& what) {
  const double v = number(j, what);
  require(std::isfinite(v), what + ": must be finite");
  return v;
}

inline int integer(const json& j, const std::string& what) {
  require(j.is_number_integer(), what + ": expected an integer");
  return j.get<int>();
}

inline Vector vector(const json& j, const std::string& what) {
  require(j.is_array(), what + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = finite_number(j[i], what + "[" + std::to_string(i) + "]");
  return v;
}

inline std::vector<Vector> points(const json& j, const std::string& what) {
  require(j.is_array(), what + ": expected an array of points");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vector(j[i], what + "[" + std::to_string(i) + "]"));
    require(out.back().size() == out.front().size(), what + ": points of different dimensions");
  }
  return out;
}

/** Row-major matrix; `inf` entries allowed when `allow_inf`. */
inline Matrix matrix(const json& j, const std::string& what, bool allow_inf = false) {
  require(j.is_array(), what + ": expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : (j[0].is_array() ? j[0].size() : 0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    require(j[r].is_array() && j[r].size() == cols, what + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string name = what + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          allow_inf ? number(j[r][c], name) : finite_number(j[r][c], name);
    }
  }
  return m;
}

/** {dist: [[...]]} or {points: [[...]]} with max-norm distances. */
inline PseudometricSpace space(const json& j) {
  PseudometricSpace s;
  if (has(j, "dist")) {
    s = PseudometricSpace(matrix(j["dist"], "dist", true));
  } else {
    const std::vector<Vector> pts = points(field(j, "points"), "points");
    Matrix d(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = 0; b < pts.size(); ++b)
        d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = max_dist(pts[a], pts[b]);
    s = PseudometricSpace(d);
  }
  s.validate();
  return s;
}

/**
 * {rho, edges?, weights?, A?}. Without edges the graph is complete; weights
 * default to rho on each edge and A to the measured comparison factor.
 */
inline WeightedGraph graph(const json& j) {
  const PseudometricSpace rho = space(field(j, "rho"));
  if (!has(j, "edges")) {
    require(!has(j, "weights"), "graph: weights given without edges");
    WeightedGraph g = full_graph(rho);
    if (has(j, "A")) g.factor = finite_number(j["A"], "A");
    return g;
  }
  WeightedGraph g;
  g.num_vertices = rho.size();
  g.rho = rho;
  const json& edges = j["edges"];
  require(edges.is_array(), "edges: expected an array of [u, v] pairs");
  const bool weighted = has(j, "weights");
  if (weighted) require(j["weights"].is_array() && j["weights"].size() == edges.size(), "weights: one per edge");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string name = "edges[" + std::to_string(e) + "]";
    require(edges[e].is_array() && edges[e].size() == 2, name + ": expected [u, v]");
    Edge ed{integer(edges[e][0], name), integer(edges[e][1], name), 0.0};
    require(ed.u >= 0 && ed.v >= 0 && ed.u < g.num_vertices && ed.v < g.num_vertices, name + ": vertex out of range");
    ed.weight = weighted ? number(j["weights"][e], "weights[" + std::to_string(e) + "]") : rho(ed.u, ed.v);
    g.edges.push_back(ed);
  }
  g.validate_shape();
  const PseudometricSpace sigma = path_metric(g);
  if (has(j, "A")) {
    g.factor = finite_number(j["A"], "A");
    require(g.factor >= 1.0, "A must be at least 1");
    require(satisfies_comparison(sigma, rho, g.factor, 1e-9),
            "graph: path metric is not within factor A of rho");
  } else {
    g.factor = comparison_factor(sigma, rho);
    require(std::isfinite(g.factor), "graph: path metric and rho are not comparable (disconnected graph?)");
    g.factor = std::max(1.0, g.factor);
  }
  return g;
}

/** {base, basis?: [direction, ...]}; directions are orthonormalized. */
inline AffineSubspace flat(const json& j, const std::string& what, double rank_tol = 1e-10) {
  const Vector base = vector(field(j, "base"), what + ".base");
  Matrix dirs(base.size(), 0);
  if (has(j, "basis")) {
    const std::vector<Vector> cols = points(j["basis"], what + ".basis");
    dirs.resize(base.size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      require(cols[c].size() == base.size(), what + ".basis: direction dimension differs from base");
      dirs.col(static_cast<Eigen::Index>(c)) = cols[c];
    }
  }
  return AffineSubspace(base, orthonormalize(dirs, rank_tol));
}

/** {graph | space, flats, k?}; k defaults to the largest flat dimension. */
inline AffineMap affine_map(const json& j) {
  AffineMap am;
  am.graph = has(j, "graph") ? graph(j["graph"]) : full_graph(space(field(j, "space")));
  const json& flats = field(j, "flats");
  require(flats.is_array(), "flats: expected an array");
  for (std::size_t v = 0; v < flats.size(); ++v) am.flats.push_back(flat(flats[v], "flats[" + std::to_string(v) + "]"));
  am.k = 0;
  for (const auto& f : am.flats) am.k = std::max(am.k, f.dim());
  if (has(j, "k")) {
    am.k = integer(j["k"], "k");
    require(am.k >= 0, "k must be non-negative");
  }
  return am;
}

inline CubeMap cube_map(const json& j) {
  CubeMap cm;
  cm.space = space(field(j, "space"));
  const json& cubes = field(j, "cubes");
  require(cubes.is_array(), "cubes: expected an array");
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const std::string name = "cubes[" + std::to_string(i) + "]";
    cm.cubes.push_back({vector(field(cubes[i], "center"), name + ".center"), number(field(cubes[i], "radius"), name)});
  }
  return cm;
}

/** {kind: power | capped_power | tabulated, alpha?, scale?, cap?, knots?, values?}. */
inline Modulus modulus(const json& j) {
  const json& kind = field(j, "kind");
  require(kind.is_string(), "omega.kind: expected a string");
  const std::string k = kind.get<std::string>();
  const double alpha = has(j, "alpha") ? finite_number(j["alpha"], "omega.alpha") : 1.0;
  const double scale = has(j, "scale") ? finite_number(j["scale"], "omega.scale") : 1.0;
  if (k == "power") return Modulus::power(alpha, scale);
  if (k == "capped_power") return Modulus::capped_power(alpha, finite_number(field(j, "cap"), "omega.cap"), scale);
  if (k == "tabulated") {
    const Vector t = vector(field(j, "knots"), "omega.knots"), v = vector(field(j, "values"), "omega.values");
    return Modulus::tabulated(std::vector<double>(t.data(), t.data() + t.size()),
                              std::vector<double>(v.data(), v.data() + v.size()));
  }
  throw InputError("omega.kind: unknown modulus '" + k + "'");
}

inline Modulus modulus_or_lipschitz(const json& j) {
  return has(j, "omega") ? modulus(j["omega"]) : Modulus::power(1.0);
}

inline SampledFunction sampled_function(const json& j) {
  SampledFunction sf;
  sf.points = points(field(j, "X"), "X");
  sf.values = vector(field(j, "f"), "f");
  sf.omega = modulus_or_lipschitz(j);
  return sf;
}

inline Jet1 jet(const json& j) {
  Jet1 jt;
  jt.points = points(field(j, "X"), "X");
  jt.values = vector(field(j, "f"), "f");
  jt.gradients = points(field(j, "g"), "g");
  jt.omega = modulus_or_lipschitz(j);
  return jt;
}

inline SampledSystem system(const json& j) {
  SampledSystem s;
  s.points = points(field(j, "X"), "X");
  const json& a = field(j, "A");
  require(a.is_array(), "A: expected one matrix per point");
  for (std::size_t i = 0; i < a.size(); ++i) s.a.push_back(matrix(a[i], "A[" + std::to_string(i) + "]"));
  const json& b = field(j, "b");
  require(b.is_array(), "b: expected one vector per point");
  for (std::size_t i = 0; i < b.size(); ++i) s.b.push_back(vector(b[i], "b[" + std::to_string(i) + "]"));
  s.omega = modulus_or_lipschitz(j);
  return s;
}

/** {queries: {points: [...]}} or {queries: [...]}. */
inline std::vector<Vector> queries(const json& j) {
  const json& q = field(j, "queries");
  return points(q.is_object() ? field(q, "points") : q, "queries");
}

// ---------------------------------------------------------------- writing

inline json to_json(double v) {
  if (is_inf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v[i]));
  return out;
}

inline json to_json(const std::vector<Vector>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(to_json(p));
  return out;
}

inline json to_json(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(to_json(x));
  return out;
}

inline json to_json(const AffineSubspace& f) {
  json dirs = json::array();
  for (Eigen::Index c = 0; c < f.basis.cols(); ++c) dirs.push_back(to_json(Vector(f.basis.col(c))));
  return {{"base", to_json(f.base)}, {"basis", dirs}};
}

inline json to_json(const Modulus& m) {
  switch (m.kind) {
    case Modulus::Kind::kPower:
      return {{"kind", "power"}, {"alpha", m.alpha}, {"scale", m.scale}};
    case Modulus::Kind::kCappedPower:
      return {{"kind", "capped_power"}, {"alpha", m.alpha}, {"scale", m.scale}, {"cap", to_json(m.cap)}};
    case Modulus::Kind::kTabulated:
      return {{"kind", "tabulated"}, {"knots", to_json(m.knots)}, {"values", to_json(m.values)}};
  }
  return {};
}

inline json to_json(const SelectionDiagnostics& d) {
  json stages = json::array();
  for (const auto& s : d.stages)
    stages.push_back({{"depth", s.depth},
                      {"level_k", s.level_k},
                      {"vertices", s.vertices},
                      {"edges", s.edges},
                      {"doubled", s.doubled},
                      {"parallel", s.parallel},
                      {"max_pairs", s.max_pairs},
                      {"hub_graph", s.hub_graph},
                      {"stage_constant", to_json(s.stage_constant)},
                      {"lambda", to_json(s.lambda)},
                      {"seminorm", to_json(s.seminorm)}});
  json edges = json::array();
  for (const auto& e : d.edges)
    edges.push_back({{"v1", e.v1},
                     {"v2", e.v2},
                     {"x1", to_json(e.x1)},
                     {"x2", to_json(e.x2)},
                     {"anchor_distance", to_json(e.anchor_distance)},
                     {"rho", to_json(e.rho)},
                     {"radii", to_json(e.radii)},
                     {"pair_dims", e.pair_dims},
                     {"parallel", e.parallel}});
  return {{"k_requested", d.k_requested},
          {"k_effective", d.k_effective},
          {"lipschitz_bound", to_json(d.lipschitz_bound)},
          {"stage_constant", to_json(d.stage_constant)},
          {"lambda", to_json(d.lambda)},
          {"factorization_checked", d.factorization_checked},
          {"factorization_defect", to_json(d.factorization_defect)},
          {"stages", stages},
          {"edges", edges}};
}

inline json to_json(const ValidationReport& r) {
  json cube_deviation = json::array();
  for (const auto& c : r.cube_deviation)
    cube_deviation.push_back({{"vertex", c.vertex},
                      {"deviation", to_json(c.deviation)},
                      {"bound", to_json(c.bound)},
                      {"holds", c.holds}});
  return {{"ok", r.ok},
          {"max_membership_residual", to_json(r.max_membership_residual)},
          {"seminorm", to_json(r.seminorm)},
          {"base_case", r.base_case},
          {"base_case_bound_holds", r.base_case_bound_holds},
          {"cube_deviation", cube_deviation}};
}

inline json to_json(const JetNorms& n) {
  return {{"sup_f", to_json(n.sup_f)},     {"sup_g", to_json(n.sup_g)},       {"taylor", to_json(n.taylor)},
          {"holder", to_json(n.holder)},   {"seminorm", to_json(n.seminorm)}, {"norm", to_json(n.norm)}};
}

inline json to_json(const OracleReport& r, bool with_subsets) {
  json out = {{"lambda_star", to_json(r.lambda_star)}};
  if (!r.witness.empty()) out["witness"] = to_json(r.witness);
  if (!r.worst_subset.empty()) out["worst_subset"] = r.worst_subset;
  if (with_subsets) {
    json subs = json::array();
    for (const auto& s : r.subset_results) subs.push_back({{"subset", s.subset}, {"lambda", to_json(s.lambda)}});
    out["subsets"] = subs;
  }
  return out;
}

/** Result envelope shared by every command. */
inline json document(const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace lipsel::io
