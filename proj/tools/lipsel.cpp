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

// lipsel command-line tool: JSON in, JSON (or CSV for bench) out.
//
// Exit codes: 0 success, 1 input or I/O error, 2 hypothesis failure (the
// offending subset is named in the output document), 3 internal error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lipsel/io.hpp"
#include "lipsel/lipsel.hpp"

namespace {

using lipsel::io::json;
namespace io = lipsel::io;

struct Job {
  std::string command;
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  int threads = 1;
  lipsel::Tolerances tol;
  // bench only
  std::string suite = "selection-ratio";
  int count = 100;
  std::string sizes;
  bool sizes_given = false;
  bool timing = false;
};

void write_output(const Job& job, const std::string& text) {
  if (job.output.empty() || job.output == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(job.output, std::ios::binary);
  if (!out) throw lipsel::InputError("cannot write " + job.output);
  out << text;
  out.close();
  if (!out) throw lipsel::InputError("error writing " + job.output);
}

json read_input(const Job& job) {
  if (job.input == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return io::parse(ss.str(), "<stdin>");
  }
  return io::read_file(job.input);
}

lipsel::SelectOptions select_options(const Job& job, const json& in) {
  lipsel::SelectOptions opt;
  opt.threads = job.threads;
  opt.tol = job.tol;
  if (io::has(in, "lipschitz_bound")) opt.lipschitz_bound = io::finite_number(in["lipschitz_bound"], "lipschitz_bound");
  return opt;
}

json header(const Job& job) {
  json doc = io::document(job.command);
  doc["status"] = "ok";
  doc["seed"] = job.seed;
  return doc;
}

json run_select(const Job& job, const json& in) {
  const lipsel::AffineMap am = io::affine_map(in);
  const lipsel::SelectOptions opt = select_options(job, in);
  const lipsel::Selection s = lipsel::select_affine(am, opt);
  json doc = header(job);
  doc["result"] = {{"f", io::to_json(s.points)},
                   {"seminorm", io::to_json(s.seminorm)},
                   {"k", am.k},
                   {"graph_factor", io::to_json(am.graph.factor)},
                   {"validation", io::to_json(lipsel::validate_selection(am, s, job.tol.membership))}};
  doc["diagnostics"] = io::to_json(s.diagnostics);
  return doc;
}

json run_select_cube(const Job& job, const json& in) {
  const lipsel::CubeMap cm = io::cube_map(in);
  const lipsel::Selection s = lipsel::select_cube(cm, job.tol);
  double membership = 0.0;
  for (std::size_t i = 0; i < cm.cubes.size(); ++i)
    if (cm.cubes[i].bounded())
      membership = std::max(membership, lipsel::max_dist(s.points[i], cm.cubes[i].center) - cm.cubes[i].radius);
  json doc = header(job);
  doc["result"] = {{"f", io::to_json(s.points)},
                   {"seminorm", io::to_json(s.seminorm)},
                   {"max_membership_excess", io::to_json(membership)}};
  return doc;
}

json jet_json(const lipsel::Jet1& j) {
  return {{"X", io::to_json(j.points)},
          {"f", io::to_json(j.values)},
          {"g", io::to_json(j.gradients)},
          {"omega", io::to_json(j.omega)}};
}

json run_whitney(const Job& job, const json& in) {
  const lipsel::SampledFunction sf = io::sampled_function(in);
  const lipsel::WhitneyResult r = lipsel::whitney_select(sf, select_options(job, in));
  json doc = header(job);
  doc["result"] = {{"jet", jet_json(r.jet)},
                   {"norms", io::to_json(r.norms)},
                   {"c_ell", io::to_json(r.c_ell)},
                   {"holder", io::to_json(r.holder)},
                   {"taylor", io::to_json(r.taylor)}};
  doc["diagnostics"] = {{"pair_space_size", r.space.size()},
                        {"omega_normalized", io::to_json(r.space.omega)},
                        {"selection_seminorm", io::to_json(r.selection.seminorm)},
                        {"selection", io::to_json(r.selection.diagnostics)}};
  return doc;
}

json run_extend_c11(const Job& job, const json& in) {
  const lipsel::Jet1 j = io::jet(in);
  const double seminorm = lipsel::c11_seminorm(j);
  const double m = io::has(in, "M") ? io::finite_number(in["M"], "M") : seminorm;
  const std::vector<lipsel::Vector> q = io::queries(in);
  const std::vector<lipsel::C11Value> vals = lipsel::extend_c11(j, m, q, job.tol, job.threads);
  json values = json::array(), grads = json::array();
  for (const auto& v : vals) {
    values.push_back(io::to_json(v.value));
    grads.push_back(io::to_json(v.grad));
  }
  json doc = header(job);
  doc["result"] = {{"M", io::to_json(m)}, {"queries", io::to_json(q)}, {"F", values}, {"grad_F", grads}};
  doc["diagnostics"] = {{"jet_seminorm", io::to_json(seminorm)}};
  return doc;
}

json run_kirszbraun(const Job& job, const json& in) {
  const std::vector<lipsel::Vector> x = io::points(io::field(in, "X"), "X");
  const std::vector<lipsel::Vector> f = io::points(io::field(in, "f"), "f");
  lipsel::require(x.size() == f.size(), "kirszbraun: one value per point required");
  const double lip = x.empty() ? 0.0 : lipsel::euclidean_lipschitz(x, f);
  const double m = io::has(in, "M") ? io::finite_number(in["M"], "M") : lip;
  const std::vector<lipsel::Vector> q = io::queries(in);
  const std::vector<lipsel::Vector> vals = lipsel::kirszbraun_extend(x, f, m, q, job.tol, job.threads);
  json doc = header(job);
  doc["result"] = {{"M", io::to_json(m)}, {"queries", io::to_json(q)}, {"F", io::to_json(vals)}};
  doc["diagnostics"] = {{"data_lipschitz", io::to_json(lip)}};
  return doc;
}

json run_linsys(const Job& job, const json& in) {
  const lipsel::SampledSystem s = io::system(in);
  const lipsel::HolderSolution sol = lipsel::solve_holder_system(s, select_options(job, in));
  json flats = json::array();
  for (const auto& f : sol.flats) flats.push_back(io::to_json(f));
  json doc = header(job);
  doc["result"] = {{"g", io::to_json(sol.values)},
                   {"seminorm", io::to_json(sol.seminorm)},
                   {"max_residual", io::to_json(sol.max_residual)},
                   {"omega", io::to_json(s.omega)}};
  doc["diagnostics"] = {{"solution_flats", flats}, {"selection", io::to_json(sol.selection.diagnostics)}};
  return doc;
}

/** Affine map: global optimum, plus the subset maximum when "finiteness" is set.
 *  Sampled function {X, f}: subset maximum of minimal jet norms. */
json run_oracle(const Job& job, const json& in) {
  json doc = header(job);
  if (io::has(in, "X")) {
    const lipsel::SampledFunction sf = io::sampled_function(in);
    const int n = sf.dim();
    const int card = io::has(in, "max_card") ? io::integer(in["max_card"], "max_card") : 3 * (1 << std::max(0, n - 1));
    const lipsel::OracleReport rep = lipsel::jet_finiteness_check(sf, card, job.tol);
    doc["result"] = {{"max_card", card}, {"finiteness", io::to_json(rep, false)}};
    return doc;
  }
  const lipsel::AffineMap am = io::affine_map(in);
  const lipsel::OracleReport global = lipsel::optimal_selection_lp(am.graph.rho, am.flats, job.tol);
  doc["result"] = {{"optimum", io::to_json(global, false)}};
  if (io::has(in, "finiteness") && in["finiteness"].is_boolean() && in["finiteness"].get<bool>()) {
    const lipsel::OracleReport sub = lipsel::finiteness_check(am, job.tol);
    doc["result"]["finiteness"] = io::to_json(sub, io::has(in, "list_subsets") && in["list_subsets"] == true);
    doc["result"]["finiteness"]["subset_count"] = sub.subset_results.size();
  }
  return doc;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    lipsel::require(used > 0 && used == item.size(), "--sizes: '" + item + "' is not an integer");
    out.push_back(v);
  }
  lipsel::require(!out.empty(), "--sizes: empty sizes list");
  return out;
}

std::string run_bench(const Job& job) {
  lipsel::bench::BenchOptions opt;
  opt.suite = job.suite;
  opt.seed = job.seed;
  opt.count = job.count;
  opt.timing = job.timing;
  opt.select.threads = job.threads;
  opt.select.tol = job.tol;
  lipsel::require(lipsel::bench::known_suite(opt.suite), "bench: unknown suite '" + opt.suite + "'");
  if (job.sizes_given) opt.sizes = parse_sizes(job.sizes);
  return lipsel::bench::run(opt);
}

std::string run(const Job& job) {
  lipsel::require(job.tol.feasibility > 0 && job.tol.kkt > 0, "tolerances must be positive");
  lipsel::require(job.threads >= 1, "--threads must be at least 1");
  if (job.command == "bench") return run_bench(job);
  const json in = read_input(job);
  lipsel::require(in.is_object(), "input: expected a JSON object");
  json doc;
  if (job.command == "select") doc = run_select(job, in);
  else if (job.command == "select-cube") doc = run_select_cube(job, in);
  else if (job.command == "whitney") doc = run_whitney(job, in);
  else if (job.command == "extend-c11") doc = run_extend_c11(job, in);
  else if (job.command == "kirszbraun") doc = run_kirszbraun(job, in);
  else if (job.command == "linsys") doc = run_linsys(job, in);
  else if (job.command == "oracle") doc = run_oracle(job, in);
  else throw lipsel::InputError("unknown command " + job.command);
  return io::dump(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz selections, Whitney jets and smooth extensions of finite data"};
  app.require_subcommand(1);
  Job job;

  auto common = [&](CLI::App* sub, bool with_input) {
    if (with_input) sub->add_option("input", job.input, "input JSON file ('-' for stdin)")->required();
    sub->add_option("-o,--output", job.output, "output file (default stdout)");
    sub->add_option("--tol-feas", job.tol.feasibility, "LP feasibility tolerance");
    sub->add_option("--tol-kkt", job.tol.kkt, "envelope QP KKT tolerance");
    sub->add_option("--seed", job.seed, "random seed");
    sub->add_option("--threads", job.threads, "worker threads");
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"select", "Lipschitz selection of an affine-set-valued map"},
      {"select-cube", "1-Lipschitz selection of a cube-valued map"},
      {"whitney", "complete sampled values to a C^{1,omega} jet"},
      {"extend-c11", "evaluate the C^{1,1} extension of a jet"},
      {"kirszbraun", "evaluate the Lipschitz extension of a vector-valued map"},
      {"linsys", "omega-Holder solution of a pointwise linear system"},
      {"oracle", "exact optimum and subset maxima by linear programming"},
  };
  for (const auto& [name, help] : commands) common(app.add_subcommand(name, help), true);
  CLI::App* bench = app.add_subcommand("bench", "benchmark suites as CSV");
  common(bench, false);
  bench->add_option("--suite", job.suite, "selection-ratio or finiteness");
  bench->add_option("--count", job.count, "number of instances");
  bench->add_option("--sizes", job.sizes, "comma-separated vertex counts")->expected(0, 1);
  bench->add_flag("--timing", job.timing, "record wall times (output is no longer reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  job.command = app.get_subcommands().front()->get_name();
  job.sizes_given = bench->count("--sizes") > 0;

  try {
    write_output(job, run(job));
    return 0;
  } catch (const lipsel::HypothesisFailure& e) {
    json doc = io::document(job.command);
    doc["status"] = "hypothesis_failure";
    doc["seed"] = job.seed;
    doc["message"] = e.what();
    doc["subset"] = e.subset();
    try {
      write_output(job, io::dump(doc));
    } catch (const lipsel::InputError& w) {
      std::cerr << "lipsel: " << w.what() << "\n";
    }
    std::cerr << "lipsel: hypothesis failure: " << e.what() << "\n";
    return 2;
  } catch (const lipsel::InputError& e) {
    std::cerr << "lipsel: error: " << e.what() << "\n";
    return 1;
  } catch (const lipsel::InternalError& e) {
    std::cerr << "lipsel: internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "lipsel: internal error: " << e.what() << "\n";
    return 3;
  }
}
