#include "treeshift/dimension.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "treeshift/parallel.hpp"

namespace treeshift {

Ratios simplex_to_ratios(const std::vector<double>& s, int d) {
  const int p = static_cast<int>(s.size());
  if (p == 0) fail(ErrorCode::Validation, "empty simplex point");
  const double dd = d;
  const double scale = (std::pow(dd, p) - std::pow(dd, p - 1)) / (std::pow(dd, p) - 1.0);
  Ratios out;
  out.q.assign(static_cast<std::size_t>(p), 0.0);
  for (int i = 0; i < p; ++i) {
    double acc = 0.0;
    for (int j = 0; j < p; ++j) acc += s[static_cast<std::size_t>(((i - j) % p + p) % p)] * std::pow(dd, -j);
    out.q[static_cast<std::size_t>(i)] = acc * scale;
  }
  out.r.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) out.r[static_cast<std::size_t>(i)] = out.q[static_cast<std::size_t>(i)] / out.q[static_cast<std::size_t>((i + 1) % p)];
  out.q0 = rotated_coefficient(out.r, 0);
  return out;
}

double rotated_coefficient(const std::vector<double>& r, int j) {
  const int p = static_cast<int>(r.size());
  double sum = 0.0, prod = 1.0;
  for (int l = 0; l < p; ++l) {
    prod /= r[static_cast<std::size_t>(((l + j) % p + p) % p)];
    sum += prod;
  }
  return 1.0 / sum;
}

std::vector<double> ratios_to_simplex(const std::vector<double>& r, int d) {
  const int p = static_cast<int>(r.size());
  std::vector<double> q(static_cast<std::size_t>(p));
  q[0] = rotated_coefficient(r, 0);
  for (int i = 1; i < p; ++i) q[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i - 1)] / r[static_cast<std::size_t>(i - 1)];
  if (p == 1) return {1.0};
  std::vector<double> s(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    s[static_cast<std::size_t>(i)] = (d * q[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>((i - 1 + p) % p)]) / (d - 1.0);
  return s;
}

std::vector<double> project_to_simplex(std::vector<double> x) {
  auto u = x;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (auto& v : x) v = std::max(v - theta, 0.0);
  return x;
}

double dim_objective(const AdjacencyModel& model, const PeriodStructure& period, const std::vector<double>& s, int j,
                     const EigenOptions& options) {
  const auto ratios = simplex_to_ratios(s, model.arity);
  const auto eig = principal_eigenpair(model, period, ratios.r, j, options);
  return rotated_coefficient(ratios.r, options.literal ? 0 : period.wrap(j)) * eig.log_rho;
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  double v = 1.0;
  for (std::size_t i = 1; i <= k; ++i) v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
  return v > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(v + 0.5);
}

int grid_divisions(int p, const DimensionOptions& opt) {
  if (opt.grid_divisions > 0) return opt.grid_divisions;
  if (p <= 3) return 50;
  if (p <= 5) return 12;
  int n = 1;
  while (binomial(static_cast<std::size_t>(n + p), static_cast<std::size_t>(p - 1)) <= opt.max_grid_points) ++n;
  return n;
}

void compositions(int parts, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(parts - 1, total - k, cur, out);
    cur.pop_back();
  }
}

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

SimplexMinimum minimize_on_simplex(int p, const std::function<double(const std::vector<double>&)>& f,
                                   const DimensionOptions& options) {
  SimplexMinimum best;
  if (p == 1) {
    best.s = {1.0};
    best.value = f(best.s);
    best.evaluations = 1;
    return best;
  }
  const int n_div = grid_divisions(p, options);
  if (binomial(static_cast<std::size_t>(n_div + p - 1), static_cast<std::size_t>(p - 1)) > options.max_grid_points)
    fail(ErrorCode::Resource, "SearchFailed: simplex grid exceeds the point budget");
  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  compositions(p, n_div, cur, comps);
  if (comps.empty()) fail(ErrorCode::Resource, "SearchFailed: empty simplex grid");

  const double phase = options.grid_phase;
  std::vector<std::vector<double>> points(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (int k : comps[i]) points[i].push_back((k + phase) / (n_div + p * phase));
  std::vector<double> values(points.size());
  parallel_for(points.size(), options.threads, [&](std::size_t i) { values[i] = f(points[i]); });
  best.evaluations = static_cast<int>(points.size());

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  best.s = points[order[0]];
  best.value = values[order[0]];

  // Nelder-Mead on the first p-1 coordinates; the last is 1 - sum. Points are
  // projected onto the simplex and the distance moved is penalized.
  const int dim = p - 1;
  auto lift = [&](const std::vector<double>& x) {
    std::vector<double> s(x);
    s.push_back(1.0 - std::accumulate(x.begin(), x.end(), 0.0));
    return s;
  };
  auto penalized = [&](const std::vector<double>& x, std::vector<double>* on_simplex) {
    auto s = lift(x);
    auto proj = project_to_simplex(s);
    double dist = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) dist += std::abs(s[i] - proj[i]);
    const double v = f(proj);
    ++best.evaluations;
    if (on_simplex) *on_simplex = proj;
    return v + 10.0 * dist;
  };

  const int starts = std::min<int>(options.nm_starts, static_cast<int>(order.size()));
  const double h = 1.0 / n_div;
  for (int st = 0; st < starts; ++st) {
    const auto& s0 = points[order[static_cast<std::size_t>(st)]];
    std::vector<Vertex> simplex;
    std::vector<double> x0(s0.begin(), s0.end() - 1);
    simplex.push_back({x0, values[order[static_cast<std::size_t>(st)]]});
    for (int i = 0; i < dim; ++i) {
      auto x = x0;
      x[static_cast<std::size_t>(i)] += (s0[static_cast<std::size_t>(i)] + h <= 1.0) ? h : -h;
      simplex.push_back({x, penalized(x, nullptr)});
    }
    int evals = 0;
    while (evals < options.nm_max_evals) {
      std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      double size = 0.0;
      for (std::size_t v = 1; v < simplex.size(); ++v)
        for (int i = 0; i < dim; ++i) size = std::max(size, std::abs(simplex[v].x[i] - simplex[0].x[i]));
      if (simplex.back().f - simplex.front().f < options.nm_tolerance && size < 1e-7) break;

      std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
      for (std::size_t v = 0; v + 1 < simplex.size(); ++v)
        for (int i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i] / dim;
      auto along = [&](double t) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) x[i] = centroid[i] + t * (simplex.back().x[i] - centroid[i]);
        return x;
      };
      auto xr = along(-1.0);
      const double fr = penalized(xr, nullptr);
      ++evals;
      if (fr < simplex.front().f) {
        auto xe = along(-2.0);
        const double fe = penalized(xe, nullptr);
        ++evals;
        simplex.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        continue;
      }
      if (fr < simplex[simplex.size() - 2].f) {
        simplex.back() = {xr, fr};
        continue;
      }
      const bool outside = fr < simplex.back().f;
      auto xc = along(outside ? -0.5 : 0.5);
      const double fc = penalized(xc, nullptr);
      ++evals;
      if (fc < std::min(fr, simplex.back().f)) {
        simplex.back() = {xc, fc};
        continue;
      }
      for (std::size_t v = 1; v < simplex.size(); ++v) {
        for (int i = 0; i < dim; ++i) simplex[v].x[i] = simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
        simplex[v].f = penalized(simplex[v].x, nullptr);
        ++evals;
      }
    }
    std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    std::vector<double> s_best;
    penalized(simplex.front().x, &s_best);
    const double v = f(s_best);
    if (v < best.value) {
      best.value = v;
      best.s = s_best;
    }
  }
  return best;
}

namespace {

SimplexMinimum minimize_class(const AdjacencyModel& model, const PeriodStructure& period, int j,
                              const DimensionOptions& options) {
  return minimize_on_simplex(
      period.period, [&](const std::vector<double>& s) { return dim_objective(model, period, s, j, options.eigen); },
      options);
}

}  // namespace

DimensionReport hausdorff_dimension(const AdjacencyModel& model, const DimensionOptions& options) {
  if (!is_irreducible(model)) fail(ErrorCode::Validation, "hausdorff_dimension needs an irreducible adjacency matrix");
  const auto period = find_a0_and_period(model);
  DimensionReport rep;
  rep.period = period.period;
  rep.log_rho_linear = linear_spectral_radius(model.adjacency);
  rep.h_top = entropy_iterate(model, options.entropy_depth).h_top;
  if (period.period == 1) {
    rep.dim = rep.log_rho_linear;
    rep.argmin_r = {1.0};
    rep.argmin_s = {1.0};
    rep.class_values = {rep.dim};
    return rep;
  }
  const auto best = minimize_class(model, period, 0, options);
  rep.dim = best.value;
  rep.argmin_s = best.s;
  rep.argmin_r = simplex_to_ratios(best.s, model.arity).r;
  rep.evaluations = best.evaluations;
  rep.class_values = {best.value};
  if (options.per_class)
    for (int j = 1; j < period.period; ++j) {
      const auto other = minimize_class(model, period, j, options);
      rep.class_values.push_back(other.value);
      rep.evaluations += other.evaluations;
    }
  rep.eigvec_unique = principal_eigenpair(model, period, rep.argmin_r, 0, options.eigen).eigvec_unique;
  return rep;
}

DimensionReport general_upper_bound(const AdjacencyModel& model, const DimensionOptions& options) {
  const auto keep = reduce_a0_indices(model);
  if (keep.empty()) fail(ErrorCode::Validation, "EmptyModel: every symbol was removed while enforcing (A0)");
  const auto reduced = submodel(model, keep);
  const auto reach = reachability(reduced);
  if (reach.recurrent.empty()) fail(ErrorCode::Validation, "EmptyRecurrentSet: no symbol lies on a cycle");

  DimensionReport rep;
  rep.method = "upper_bound_general";
  rep.log_rho_linear = linear_spectral_radius(reduced.adjacency);
  rep.h_top = entropy_iterate(reduced, options.entropy_depth).h_top;
  rep.dim = kNegInf;
  rep.eigvec_unique = false;

  const Digraph graph = parent_to_child(reduced.adjacency);
  for (const auto& comp : reach.scc_list) {
    if (!has_cycle(graph, comp)) continue;
    const std::size_t a = comp.front();
    const auto& closure = reach.closures[a];
    const auto sub = submodel(reduced, closure);
    const auto local = static_cast<std::size_t>(std::find(closure.begin(), closure.end(), a) - closure.begin());
    const auto period = period_from(sub, local);
    auto opts = options;
    const auto best = minimize_class(sub, period, 0, opts);
    rep.evaluations += best.evaluations;
    rep.class_values.push_back(best.value);
    if (best.value > rep.dim) {
      rep.dim = best.value;
      rep.argmin_s = best.s;
      rep.argmin_r = simplex_to_ratios(best.s, model.arity).r;
      rep.period = period.period;
    }
  }
  return rep;
}

DimensionReport dimension(const AdjacencyModel& model, const DimensionOptions& options) {
  const auto keep = reduce_a0_indices(model);
  if (keep.size() == model.size() && is_irreducible(model)) return hausdorff_dimension(model, options);
  return general_upper_bound(model, options);
}

SpectralBound spectral_bound_report(const AdjacencyModel& model, const DimensionOptions& options) {
  SpectralBound out;
  const auto reduced = reduce_a0(model);
  auto opts = options;
  opts.per_class = false;
  out.dim = dimension(reduced, opts).dim;
  out.log_rho = linear_spectral_radius(reduced.adjacency);
  out.bound_holds = out.dim <= out.log_rho + 1e-9;
  out.constant_column_sums = true;
  int first = -1;
  for (std::size_t b = 0; b < reduced.size(); ++b) {
    int col = 0;
    for (std::size_t a = 0; a < reduced.size(); ++a) col += reduced.adjacency(a, b);
    if (first < 0) first = col;
    out.constant_column_sums = out.constant_column_sums && col == first;
  }
  out.numerically_equal = std::abs(out.dim - out.log_rho) < 1e-6;
  return out;
}

MeasureReport optimal_markov_measure(const AdjacencyModel& model, const DimensionReport& report,
                                     const DimensionOptions& options, double tol) {
  if (!is_irreducible(model)) fail(ErrorCode::Validation, "optimal_markov_measure needs an irreducible adjacency matrix");
  const auto period = find_a0_and_period(model);
  const int p = period.period;
  const auto& r = report.argmin_r;
  auto eig_opts = options.eigen;
  eig_opts.literal = false;
  const auto eig = principal_eigenpair(model, period, r, 0, eig_opts);
  const WeightMatrix log_a = to_log_weights(model.adjacency);

  // w[j] lives on class -j.
  std::vector<LogVector> w{eig.eigvec};
  for (int j = 0; j + 1 < p; ++j) {
    auto next = psi(log_a, r[static_cast<std::size_t>(j)], w.back());
    const double z = log_sum_exp(next);
    for (auto& v : next) v -= z;
    w.push_back(std::move(next));
  }

  const std::size_t n = model.size();
  MeasureReport out;
  out.M = RealMatrix(n, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    const int c = period.class_of[b];
    const auto& wj = w[static_cast<std::size_t>(((-c - 1) % p + p) % p)];
    LogSumExp norm;
    for (std::size_t a = 0; a < n; ++a)
      if (model.allows(a, b)) norm.add(wj[a]);
    const double z = norm.value();
    for (std::size_t a = 0; a < n; ++a)
      if (model.allows(a, b)) out.M(a, b) = std::exp(wj[a] - z);
  }

  WeightedChainModel chain{model, out.M, RealMatrix(n, 0.0)};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (out.M(a, b) > 0.0) chain.W(a, b) = 1.0 / out.M(a, b);
  const auto summary = lln_summary(chain, period);
  out.phase_values = summary.phases;
  out.pi = phase_distributions(chain, period)[0];
  out.validation_value = summary.alpha_minus;
  out.dim = report.dim;
  if (!(std::abs(out.validation_value - out.dim) <= tol)) {
    std::ostringstream os;
    os.precision(12);
    os << "ValidationFailed: measure phases give " << out.validation_value << " but dim is " << out.dim;
    fail(ErrorCode::Numeric, os.str());
  }
  return out;
}

}  // namespace treeshift
