// Command-line front end. Reports go to stdout (JSON by default), logs and
// errors to stderr. Exit codes: 2 parse, 3 validation, 4 numeric, 5 resource.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treeshift/treeshift_c.h"

namespace {

using nlohmann::json;

struct Common {
  std::string model_path;
  int threads = 1;
  bool stable = false;
  std::string json_path;
  std::string csv_path;
};

using Command = int (*)(const ts_model_t*, const char*, char**, char**);

int write_to(const std::string& path, const char* text) {
  if (!text) return 0;
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 5;
  }
  out << text;
  return 0;
}

int run(const Common& c, json options, Command command) {
  options["threads"] = c.threads;
  if (c.stable) options["stable"] = true;
  ts_model_t* model = nullptr;
  int status = ts_model_from_file(c.model_path.c_str(), &model);
  if (status != TS_OK) {
    std::cerr << "error: " << ts_last_error() << "\n";
    return status;
  }
  char* out_json = nullptr;
  char* out_csv = nullptr;
  const std::string opts = options.dump();
  status = command(model, opts.c_str(), &out_json, c.csv_path.empty() ? nullptr : &out_csv);
  if (status != TS_OK) {
    std::cerr << "error: " << ts_last_error() << "\n";
  } else {
    // CSV to stdout replaces the JSON report there unless it has its own file.
    const bool csv_on_stdout = c.csv_path == "-";
    if (!csv_on_stdout || !c.json_path.empty()) status = write_to(c.json_path, out_json);
    if (status == TS_OK && !c.csv_path.empty()) {
      if (!out_csv) std::cerr << "note: this run produced no CSV table\n";
      status = write_to(c.csv_path, out_csv);
    }
  }
  ts_string_free(out_json);
  ts_string_free(out_csv);
  ts_model_free(model);
  return status;
}

// Adapters giving every command the same shape.
int analyze(const ts_model_t* m, const char* o, char** j, char**) { return ts_analyze(m, o, j); }
int lln(const ts_model_t* m, const char* o, char** j, char**) { return ts_lln(m, o, j); }
int entropy(const ts_model_t* m, const char* o, char** j, char**) { return ts_entropy(m, o, j); }
int measure(const ts_model_t* m, const char* o, char** j, char**) { return ts_measure(m, o, j); }

void add_common(CLI::App* sub, Common& c, bool csv) {
  sub->add_option("model", c.model_path, "model JSON file")->required();
  sub->add_option("--json", c.json_path, "write the JSON report here instead of stdout");
  if (csv) sub->add_option("--csv", c.csv_path, "write the CSV table to this path ('-' for stdout)");
}

template <class T>
void put(json& o, const char* key, const std::optional<T>& v) {
  if (v) o[key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis of Markov chains indexed by rooted d-trees"};
  app.set_version_flag("--version", std::string(ts_version()));
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--threads", c.threads, "worker threads; results do not depend on this")->default_val(1);
  app.add_flag("--stable", c.stable, "omit wall time so outputs are byte-stable");

  auto* an = app.add_subcommand("analyze", "period, classes and reachability of the adjacency matrix");
  add_common(an, c, false);

  auto* dim = app.add_subcommand("dimension", "Hausdorff dimension of the tree-shift");
  add_common(dim, c, true);
  std::optional<int> grid, eig_iter, nm_evals;
  std::optional<double> phase, eig_tol, nm_tol;
  bool literal = false, scan = false;
  dim->add_option("--grid", grid, "simplex grid divisions (default 50 for p<=3, 12 for p<=5)");
  dim->add_option("--grid-phase", phase, "grid offset as a fraction of a cell (default 0)");
  dim->add_option("--eigen-tol", eig_tol, "eigenvalue bracket tolerance (default 1e-11)");
  dim->add_option("--eigen-max-iter", eig_iter, "power iteration budget (default 10000)");
  dim->add_option("--nm-tol", nm_tol, "Nelder-Mead spread tolerance (default 1e-10)");
  dim->add_option("--nm-max-evals", nm_evals, "Nelder-Mead evaluation budget per start (default 4000)");
  dim->add_flag("--literal", literal, "use the unrotated operator for every class");
  dim->add_flag("--scan", scan, "emit the objective over the simplex grid as CSV");

  auto* rt = app.add_subcommand("rate", "rate function of the tree sample mean");
  add_common(rt, c, true);
  std::optional<int> cls, points, pmax;
  std::optional<double> margin, alpha, ptol, mubig;
  rt->add_option("--class", cls, "phase j (default 0)");
  rt->add_option("--points", points, "grid points (default 200)");
  rt->add_option("--margin", margin, "grid margin beyond the finite domain (default 0.05)");
  rt->add_option("--alpha", alpha, "evaluate a single alpha instead of a curve");
  rt->add_option("--pressure-tol", ptol, "pressure truncation tolerance (default 1e-10)");
  rt->add_option("--pressure-max-n", pmax, "pressure recursion depth cap (default 400)");
  rt->add_option("--mu-big", mubig, "starting |mu| for the domain endpoints (default 1000)");

  auto* ll = app.add_subcommand("lln", "LLN limits per phase");
  add_common(ll, c, false);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo LLN experiment");
  add_common(sim, c, true);
  std::optional<int> depth, trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> root;
  std::optional<double> tail_lo, tail_hi;
  sim->add_option("--depth", depth, "tree depth (default 10)");
  sim->add_option("--trials", trials, "number of trees (default 1)");
  sim->add_option("--seed", seed, "RNG seed (default 1)");
  sim->add_option("--root", root, "root symbol name or index (default a0)");
  sim->add_option("--tail-lo", tail_lo, "lower end of a tail-frequency window");
  sim->add_option("--tail-hi", tail_hi, "upper end of a tail-frequency window");

  auto* orc = app.add_subcommand("oracle", "exact enumeration at small depth");
  add_common(orc, c, true);
  std::optional<int> n_or;
  std::optional<std::string> root_or;
  bool list_classes = false;
  orc->add_option("--n", n_or, "depth (default 2)");
  orc->add_option("--root", root_or, "root symbol name or index (default a0)");
  orc->add_flag("--list-classes", list_classes, "include every type class in the report");

  auto* ent = app.add_subcommand("entropy", "block-count entropy h_top");
  add_common(ent, c, false);
  std::optional<int> n_max;
  ent->add_option("--n-max", n_max, "recursion depth (default 40)");

  auto* mea = app.add_subcommand("measure", "optimal Markov measure at the dimension minimizer");
  add_common(mea, c, false);
  std::optional<double> vtol;
  mea->add_option("--validation-tol", vtol, "tolerance of the dimension identity (default 1e-6)");

  CLI11_PARSE(app, argc, argv);

  json o = json::object();
  if (an->parsed()) return run(c, o, analyze);
  if (dim->parsed()) {
    put(o, "grid_divisions", grid);
    put(o, "grid_phase", phase);
    put(o, "eigen_tolerance", eig_tol);
    put(o, "eigen_max_iter", eig_iter);
    put(o, "nm_tolerance", nm_tol);
    put(o, "nm_max_evals", nm_evals);
    if (literal) o["literal"] = true;
    if (scan) o["scan"] = true;
    return run(c, o, ts_dimension);
  }
  if (rt->parsed()) {
    put(o, "class", cls);
    put(o, "points", points);
    put(o, "margin", margin);
    put(o, "alpha", alpha);
    put(o, "pressure_tolerance", ptol);
    put(o, "pressure_max_n", pmax);
    put(o, "mu_big", mubig);
    return run(c, o, ts_rate);
  }
  if (ll->parsed()) return run(c, o, lln);
  if (sim->parsed()) {
    put(o, "depth", depth);
    put(o, "trials", trials);
    put(o, "seed", seed);
    put(o, "root", root);
    put(o, "tail_lo", tail_lo);
    put(o, "tail_hi", tail_hi);
    return run(c, o, ts_simulate);
  }
  if (orc->parsed()) {
    put(o, "n", n_or);
    put(o, "root", root_or);
    if (list_classes) o["list_classes"] = true;
    return run(c, o, ts_oracle);
  }
  if (ent->parsed()) {
    put(o, "n_max", n_max);
    return run(c, o, entropy);
  }
  if (mea->parsed()) {
    put(o, "validation_tolerance", vtol);
    return run(c, o, measure);
  }
  return 1;
}
