#include "treeshift/treeshift_c.h"

#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "treeshift/dimension.hpp"
#include "treeshift/io.hpp"
#include "treeshift/oracle.hpp"
#include "treeshift/stochastic.hpp"

using nlohmann::json;
using namespace treeshift;

struct ts_model {
  ModelFile file;
  std::string hash;
};

namespace {

thread_local std::string last_error;

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class F>
int guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return TS_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TS_ERR_RESOURCE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TS_ERR_INTERNAL;
  }
}

json parse_options(const char* options) {
  if (!options || !*options) return json::object();
  try {
    auto j = json::parse(options);
    if (!j.is_object()) fail(ErrorCode::Parse, "options must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("options JSON: ") + e.what());
  }
}

template <class T>
T opt(const json& o, const char* key, T fallback) {
  if (!o.contains(key) || o[key].is_null()) return fallback;
  try {
    return o[key].get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::Validation, std::string("option '") + key + "' has the wrong type");
  }
}

std::size_t resolve_symbol(const AdjacencyModel& m, const json& v) {
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= m.size()) fail(ErrorCode::Validation, "symbol index out of range");
    return static_cast<std::size_t>(i);
  }
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    for (std::size_t a = 0; a < m.size(); ++a)
      if (m.symbols[a] == name) return a;
    // Fall back to a numeric string.
    try {
      std::size_t pos = 0;
      const auto i = std::stoll(name, &pos);
      if (pos == name.size() && i >= 0 && static_cast<std::size_t>(i) < m.size()) return static_cast<std::size_t>(i);
    } catch (const std::exception&) {
    }
    fail(ErrorCode::Validation, "unknown symbol '" + name + "'");
  }
  fail(ErrorCode::Validation, "symbol must be a name or an index");
}

json names(const AdjacencyModel& m, const std::vector<std::size_t>& idx) {
  json out = json::array();
  for (auto a : idx) out.push_back(m.symbols[a]);
  return out;
}

class Run {
 public:
  Run(const ts_model_t* model, const char* command, const char* options)
      : model_(model), options_(parse_options(options)), start_(std::chrono::steady_clock::now()) {
    if (!model) fail(ErrorCode::Validation, "null model handle");
    manifest_.command = command;
    manifest_.input_hash = model->hash;
    manifest_.config = options_;
  }

  const json& options() const { return options_; }
  const ModelFile& file() const { return model_->file; }
  const AdjacencyModel& model() const { return model_->file.model; }

  Manifest manifest() const {
    Manifest m = manifest_;
    if (!opt<bool>(options_, "stable", false))
      m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return m;
  }

  void emit(json report, char** out_json) const {
    report["manifest"] = manifest().to_json();
    if (out_json) *out_json = copy_out(report.dump(2) + "\n");
  }

  void emit_csv(const std::string& body, char** out_csv) const {
    if (out_csv) *out_csv = copy_out(manifest().csv_line() + body);
  }

  int threads() const { return std::max(1, opt<int>(options_, "threads", 1)); }

 private:
  const ts_model_t* model_;
  json options_;
  std::chrono::steady_clock::time_point start_;
  Manifest manifest_;
};

DimensionOptions dimension_options(const json& o, int threads) {
  DimensionOptions d;
  d.grid_divisions = opt<int>(o, "grid_divisions", d.grid_divisions);
  d.grid_phase = opt<double>(o, "grid_phase", d.grid_phase);
  d.nm_tolerance = opt<double>(o, "nm_tolerance", d.nm_tolerance);
  d.nm_max_evals = opt<int>(o, "nm_max_evals", d.nm_max_evals);
  d.eigen.tolerance = opt<double>(o, "eigen_tolerance", d.eigen.tolerance);
  d.eigen.max_iter = opt<int>(o, "eigen_max_iter", d.eigen.max_iter);
  d.eigen.literal = opt<bool>(o, "literal", d.eigen.literal);
  d.entropy_depth = opt<int>(o, "entropy_depth", d.entropy_depth);
  d.per_class = opt<bool>(o, "per_class", d.per_class);
  d.threads = threads;
  return d;
}

RateOptions rate_options(const json& o) {
  RateOptions r;
  r.pressure.tolerance = opt<double>(o, "pressure_tolerance", r.pressure.tolerance);
  r.pressure.max_n = opt<int>(o, "pressure_max_n", r.pressure.max_n);
  r.mu_big = opt<double>(o, "mu_big", r.mu_big);
  r.endpoint_tolerance = opt<double>(o, "endpoint_tolerance", r.endpoint_tolerance);
  return r;
}

json vec_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

json dimension_json(const DimensionReport& r) {
  return {{"dim", number(r.dim)},
          {"argmin_s", vec_json(r.argmin_s)},
          {"argmin_r", vec_json(r.argmin_r)},
          {"class_values", vec_json(r.class_values)},
          {"h_top", number(r.h_top)},
          {"log_rho", number(r.log_rho_linear)},
          {"method", r.method},
          {"period", r.period},
          {"evaluations", r.evaluations},
          {"eigvec_unique", r.eigvec_unique}};
}

Limits limits_from(const json& o) {
  Limits l;
  l.max_tree_nodes = opt<std::uint64_t>(o, "max_tree_nodes", l.max_tree_nodes);
  l.max_sample_nodes = opt<std::uint64_t>(o, "max_sample_nodes", l.max_sample_nodes);
  l.max_block_listing = opt<std::uint64_t>(o, "max_block_listing", l.max_block_listing);
  l.max_type_classes = opt<std::uint64_t>(o, "max_type_classes", l.max_type_classes);
  return l;
}

}  // namespace

extern "C" {

const char* ts_version(void) { return kToolVersion; }

const char* ts_last_error(void) { return last_error.c_str(); }

void ts_string_free(char* s) { std::free(s); }

int ts_model_from_json(const char* text, ts_model_t** out) {
  return guarded([&] {
    if (!text || !out) fail(ErrorCode::Validation, "null argument");
    auto m = std::make_unique<ts_model>();
    m->file = parse_model(text);
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << fnv1a64(text);
    m->hash = os.str();
    *out = m.release();
  });
}

int ts_model_from_file(const char* path, ts_model_t** out) {
  return guarded([&] {
    if (!path || !out) fail(ErrorCode::Validation, "null argument");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Parse, std::string("cannot read model file ") + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    auto m = std::make_unique<ts_model>();
    m->file = parse_model(text);
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << fnv1a64(text);
    m->hash = os.str();
    *out = m.release();
  });
}

void ts_model_free(ts_model_t* model) { delete model; }

int ts_model_size(const ts_model_t* model) { return model ? static_cast<int>(model->file.model.size()) : 0; }

int ts_analyze(const ts_model_t* model, const char* options, char** out_json) {
  return guarded([&] {
    Run run(model, "analyze", options);
    const auto& m = run.model();
    json rep;
    rep["symbols"] = m.symbols;
    rep["d"] = m.arity;
    rep["a0_holds"] = satisfies_a0(m);
    const auto keep = reduce_a0_indices(m);
    rep["reduced_symbols"] = names(m, keep);
    if (keep.empty()) {
      rep["a1_holds"] = false;
      rep["error"] = "EmptyModel";
      run.emit(rep, out_json);
      return;
    }
    const auto reduced = submodel(m, keep);
    const auto reach = reachability(reduced);
    rep["irreducible"] = is_irreducible(reduced);
    rep["recurrent"] = names(reduced, reach.recurrent);
    json closures = json::object();
    for (std::size_t a = 0; a < reduced.size(); ++a) closures[reduced.symbols[a]] = names(reduced, reach.closures[a]);
    rep["closures"] = closures;
    json sccs = json::array();
    for (const auto& c : reach.scc_list) sccs.push_back(names(reduced, c));
    rep["scc_list"] = sccs;
    try {
      const auto ps = find_a0_and_period(reduced);
      rep["a1_holds"] = true;
      rep["a0"] = reduced.symbols[ps.a0];
      rep["period"] = ps.period;
      json classes = json::array();
      for (const auto& c : ps.classes) classes.push_back(names(reduced, c));
      rep["classes"] = classes;
    } catch (const Error& e) {
      rep["a1_holds"] = false;
      rep["a1_verdict"] = e.what();
    }
    run.emit(rep, out_json);
  });
}

int ts_dimension(const ts_model_t* model, const char* options, char** out_json, char** out_csv) {
  return guarded([&] {
    Run run(model, "dimension", options);
    const auto opts = dimension_options(run.options(), run.threads());
    const auto reduced = reduce_a0(run.model());
    const auto rep = dimension(reduced, opts);
    json out = dimension_json(rep);
    out["dim_below_log_rho"] = rep.dim <= rep.log_rho_linear + 1e-9;
    int first = -1;
    bool constant = true;
    for (std::size_t b = 0; b < reduced.size(); ++b) {
      int col = 0;
      for (std::size_t a = 0; a < reduced.size(); ++a) col += reduced.adjacency(a, b);
      if (first < 0) first = col;
      constant = constant && col == first;
    }
    out["constant_column_sums"] = constant;

    if (out_csv && opt<bool>(run.options(), "scan", false)) {
      std::ostringstream csv;
      if (rep.method != "exact_irreducible") fail(ErrorCode::Validation, "objective scan needs an irreducible model");
      const auto ps = find_a0_and_period(reduced);
      for (int i = 0; i < ps.period; ++i) csv << "s" << i << ",";
      csv << "objective\n";
      DimensionOptions scan = opts;
      scan.nm_starts = 0;
      scan.threads = 1;
      std::vector<std::pair<std::vector<double>, double>> rows;
      minimize_on_simplex(
          ps.period,
          [&](const std::vector<double>& s) {
            const double v = dim_objective(reduced, ps, s, 0, opts.eigen);
            rows.emplace_back(s, v);
            return v;
          },
          scan);
      for (const auto& [s, v] : rows) {
        for (double x : s) csv << format_double(x) << ",";
        csv << format_double(v) << "\n";
      }
      run.emit_csv(csv.str(), out_csv);
    } else if (out_csv) {
      *out_csv = nullptr;
    }
    run.emit(out, out_json);
  });
}

int ts_rate(const ts_model_t* model, const char* options, char** out_json, char** out_csv) {
  return guarded([&] {
    Run run(model, "rate", options);
    const auto chain = chain_model(run.file());
    const auto ps = find_a0_and_period(chain.base);
    const int j = opt<int>(run.options(), "class", 0);
    const auto ropts = rate_options(run.options());
    json out;
    out["class"] = ps.wrap(j);
    if (run.options().contains("alpha")) {
      const double alpha = opt<double>(run.options(), "alpha", 0.0);
      const auto pt = rate(chain, ps, j, alpha, ropts);
      out["alpha"] = alpha;
      out["rate"] = number(pt.rate);
      out["argmax_mu"] = number(pt.argmax_mu);
      out["finite"] = pt.finite;
      run.emit(out, out_json);
      if (out_csv) *out_csv = nullptr;
      return;
    }
    GridSpec grid;
    grid.points = opt<int>(run.options(), "points", grid.points);
    grid.margin = opt<double>(run.options(), "margin", grid.margin);
    grid.threads = run.threads();
    const auto curve = rate_curve(chain, ps, j, grid, ropts);
    out["alpha1"] = number(curve.endpoints.alpha1);
    out["alpha2"] = number(curve.endpoints.alpha2);
    out["alpha_star"] = number(curve.alpha_star);
    out["points"] = curve.points.size();
    std::size_t best = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i)
      if (curve.points[i].rate < curve.points[best].rate) best = i;
    out["min_alpha"] = number(curve.points[best].alpha);
    out["min_rate"] = number(curve.points[best].rate);
    run.emit(out, out_json);
    if (out_csv) {
      std::ostringstream csv;
      csv << "alpha,rate,argmax_mu,finite\n";
      for (const auto& p : curve.points)
        csv << format_double(p.alpha) << "," << format_double(p.rate) << "," << format_double(p.argmax_mu) << ","
            << (p.finite ? 1 : 0) << "\n";
      run.emit_csv(csv.str(), out_csv);
    }
  });
}

int ts_lln(const ts_model_t* model, const char* options, char** out_json) {
  return guarded([&] {
    Run run(model, "lln", options);
    const auto chain = chain_model(run.file());
    const auto ps = find_a0_and_period(chain.base);
    const auto s = lln_summary(chain, ps);
    json pis = json::array();
    for (const auto& pi : phase_distributions(chain, ps)) pis.push_back(vec_json(pi));
    run.emit({{"period", ps.period},
              {"phases", vec_json(s.phases)},
              {"alpha_minus", number(s.alpha_minus)},
              {"alpha_plus", number(s.alpha_plus)},
              {"beta_minus", number(s.beta_minus)},
              {"beta_plus", number(s.beta_plus)},
              {"stationary", vec_json(s.stationary)},
              {"phase_distributions", pis}},
             out_json);
  });
}

int ts_simulate(const ts_model_t* model, const char* options, char** out_json, char** out_csv) {
  return guarded([&] {
    Run run(model, "simulate", options);
    const auto chain = chain_model(run.file());
    const auto& o = run.options();
    SampleConfig cfg;
    cfg.depth = opt<int>(o, "depth", cfg.depth);
    cfg.trials = opt<int>(o, "trials", cfg.trials);
    cfg.seed = opt<std::uint64_t>(o, "seed", cfg.seed);
    cfg.threads = run.threads();
    cfg.limits = limits_from(o);
    const auto ps = find_a0_and_period(chain.base);
    cfg.root = o.contains("root") ? resolve_symbol(chain.base, o["root"]) : ps.a0;
    const auto rep = lln_experiment(chain, cfg);
    json out = {{"generator", rep.generator},
                {"depth", cfg.depth},
                {"trials", cfg.trials},
                {"seed", cfg.seed},
                {"root", chain.base.symbols[*cfg.root]},
                {"empirical_mean", number(rep.empirical_mean)},
                {"standard_error", number(rep.standard_error)},
                {"phase_targets", vec_json(rep.phase_targets)},
                {"target", number(rep.target)},
                {"z_score", number(rep.z_score)},
                {"pass", rep.pass},
                {"mean_by_depth", vec_json(rep.mean_by_depth)}};
    if (o.contains("tail_lo") && o.contains("tail_hi")) {
      json tail = json::array();
      for (const auto& t : tail_estimate(chain, cfg, opt<double>(o, "tail_lo", 0.0), opt<double>(o, "tail_hi", 0.0)))
        tail.push_back({{"depth", t.depth},
                        {"hits", t.hits},
                        {"frequency", number(t.frequency)},
                        {"log_rate", number(t.log_rate)},
                        {"wilson_low", number(t.wilson_low)},
                        {"wilson_high", number(t.wilson_high)}});
      out["tail"] = tail;
    }
    run.emit(out, out_json);
    if (out_csv) {
      std::ostringstream csv;
      csv << "trial,mean\n";
      for (std::size_t t = 0; t < rep.trial_means.size(); ++t) csv << t << "," << format_double(rep.trial_means[t]) << "\n";
      run.emit_csv(csv.str(), out_csv);
    }
  });
}

int ts_oracle(const ts_model_t* model, const char* options, char** out_json, char** out_csv) {
  return guarded([&] {
    Run run(model, "oracle", options);
    const auto& o = run.options();
    const auto& m = run.model();
    const int n = opt<int>(o, "n", 2);
    const auto limits = limits_from(o);
    const auto reduced_ok = satisfies_a0(m);
    std::size_t root = 0;
    if (o.contains("root"))
      root = resolve_symbol(m, o["root"]);
    else if (reduced_ok)
      root = a0_candidates(m).empty() ? 0 : a0_candidates(m).front();

    json out;
    out["n"] = n;
    out["root"] = m.symbols[root];
    const auto rec = recursion_counts(m, n);
    json rec_json = json::object(), enum_json = json::object();
    for (std::size_t a = 0; a < m.size(); ++a) rec_json[m.symbols[a]] = rec[a].str();
    out["recursion_counts"] = rec_json;
    if (opt<bool>(o, "enumerate", true)) {
      const auto blocks = enumerate_blocks(m, n, std::nullopt, false, limits);
      for (std::size_t a = 0; a < m.size(); ++a) enum_json[m.symbols[a]] = blocks.counts[a].str();
      out["enumerated_counts"] = enum_json;
    }
    const RealMatrix M = run.file().M ? *run.file().M : RealMatrix();
    const auto classes = enumerate_type_classes(m, M, n, root, limits);
    BigInt total = 0;
    double prob = kNegInf;
    json cls = json::array();
    const bool list = opt<bool>(o, "list_classes", false);
    for (const auto& c : classes) {
      total += c.count;
      prob = log_add(prob, c.log_prob);
      if (list) {
        json levels = c.level_counts, edges = json::array();
        for (const auto& e : c.edge_counts) {
          json rows = json::array();
          for (std::size_t a = 0; a < e.size(); ++a) {
            json row = json::array();
            for (std::size_t b = 0; b < e.size(); ++b) row.push_back(e(a, b));
            rows.push_back(row);
          }
          edges.push_back(rows);
        }
        cls.push_back({{"level_counts", levels}, {"edge_counts", edges}, {"count", c.count.str()},
                       {"log_prob", number(c.log_prob)}});
      }
    }
    out["type_classes"] = classes.size();
    out["type_class_count_total"] = total.str();
    if (list) out["classes"] = cls;
    if (run.file().M) out["probability_sum"] = number(std::exp(prob));
    std::string csv_body;
    if (run.file().M) {
      const auto chain = chain_model(run.file());
      const auto atoms = exact_mean_distribution(chain, n, root, limits);
      std::ostringstream csv;
      csv << "mean,probability,log_probability\n";
      for (const auto& a : atoms)
        csv << format_double(a.mean) << "," << format_double(std::exp(a.log_prob)) << "," << format_double(a.log_prob)
            << "\n";
      csv_body = csv.str();
      out["mean_atoms"] = atoms.size();
    }
    run.emit(out, out_json);
    if (out_csv) {
      if (csv_body.empty())
        *out_csv = nullptr;
      else
        run.emit_csv(csv_body, out_csv);
    }
  });
}

int ts_entropy(const ts_model_t* model, const char* options, char** out_json) {
  return guarded([&] {
    Run run(model, "entropy", options);
    const int n_max = opt<int>(run.options(), "n_max", 40);
    const auto res = entropy_iterate(reduce_a0(run.model()), n_max);
    json seq = json::array();
    for (const auto& s : res.sequence) seq.push_back({{"n", s.n}, {"value", number(s.value)}});
    run.emit({{"h_top", number(res.h_top)}, {"sequence", seq}}, out_json);
  });
}

int ts_measure(const ts_model_t* model, const char* options, char** out_json) {
  return guarded([&] {
    Run run(model, "measure", options);
    const auto opts = dimension_options(run.options(), run.threads());
    const auto& m = run.model();
    const auto rep = hausdorff_dimension(m, opts);
    const auto mr = optimal_markov_measure(m, rep, opts, opt<double>(run.options(), "validation_tolerance", 1e-6));
    run.emit({{"dim", number(rep.dim)},
              {"argmin_r", vec_json(rep.argmin_r)},
              {"M", matrix_json(mr.M)},
              {"pi", vec_json(mr.pi)},
              {"phase_values", vec_json(mr.phase_values)},
              {"validation_value", number(mr.validation_value)}},
             out_json);
  });
}

int ts_dimension_value(const ts_model_t* model, double* out) {
  return guarded([&] {
    if (!model || !out) fail(ErrorCode::Validation, "null argument");
    *out = dimension(reduce_a0(model->file.model)).dim;
  });
}

}  // extern "C"
