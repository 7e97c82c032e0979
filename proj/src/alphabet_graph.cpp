#include "treeshift/alphabet_graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace treeshift {

void validate(const AdjacencyModel& model, const Limits& limits) {
  const std::size_t n = model.symbols.size();
  if (n == 0) fail(ErrorCode::Validation, "model has no symbols");
  if (n > limits.max_alphabet) {
    std::ostringstream os;
    os << "alphabet size " << n << " exceeds limit " << limits.max_alphabet;
    fail(ErrorCode::Resource, os.str());
  }
  if (model.adjacency.size() != n) {
    std::ostringstream os;
    os << "adjacency is " << model.adjacency.size() << "x" << model.adjacency.size() << " but there are " << n
       << " symbols";
    fail(ErrorCode::Validation, os.str());
  }
  if (model.arity < 2) fail(ErrorCode::Validation, "tree arity d must be >= 2");
  std::set<std::string> seen;
  for (const auto& s : model.symbols)
    if (!seen.insert(s).second) fail(ErrorCode::Validation, "duplicate symbol name '" + s + "'");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (model.adjacency(a, b) > 1) {
        std::ostringstream os;
        os << "adjacency[" << a << "][" << b << "] must be 0 or 1";
        fail(ErrorCode::Validation, os.str());
      }
}

bool satisfies_a0(const AdjacencyModel& model) {
  for (std::size_t b = 0; b < model.size(); ++b) {
    bool any = false;
    for (std::size_t a = 0; a < model.size(); ++a) any = any || model.allows(a, b);
    if (!any) return false;
  }
  return true;
}

AdjacencyModel submodel(const AdjacencyModel& model, const std::vector<std::size_t>& keep) {
  AdjacencyModel out;
  out.arity = model.arity;
  out.adjacency = BoolMatrix(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.symbols.push_back(model.symbols[keep[i]]);
    for (std::size_t k = 0; k < keep.size(); ++k) out.adjacency(i, k) = model.adjacency(keep[i], keep[k]);
  }
  return out;
}

std::vector<std::size_t> reduce_a0_indices(const AdjacencyModel& model) {
  const std::size_t n = model.size();
  std::vector<bool> alive(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t b = 0; b < n; ++b) {
      if (!alive[b]) continue;
      bool any = false;
      for (std::size_t a = 0; a < n && !any; ++a) any = alive[a] && model.allows(a, b);
      if (!any) {
        alive[b] = false;
        changed = true;
      }
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t a = 0; a < n; ++a)
    if (alive[a]) keep.push_back(a);
  return keep;
}

AdjacencyModel reduce_a0(const AdjacencyModel& model) {
  auto keep = reduce_a0_indices(model);
  if (keep.empty()) fail(ErrorCode::Validation, "EmptyModel: every symbol was removed while enforcing (A0)");
  return submodel(model, keep);
}

Digraph parent_to_child(const BoolMatrix& adjacency) {
  Digraph g(adjacency.size());
  for (std::size_t b = 0; b < adjacency.size(); ++b)
    for (std::size_t a = 0; a < adjacency.size(); ++a)
      if (adjacency(a, b)) g[b].push_back(a);
  return g;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const Digraph& graph) {
  const std::size_t n = graph.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < graph[f.v].size()) {
        const std::size_t w = graph[f.v][f.next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

bool has_cycle(const Digraph& graph, const std::vector<std::size_t>& component) {
  std::vector<bool> inside(graph.size(), false);
  for (auto v : component) inside[v] = true;
  for (auto v : component)
    for (auto w : graph[v])
      if (inside[w]) return true;
  return false;
}

int component_period(const Digraph& graph, const std::vector<std::size_t>& component) {
  if (component.empty()) return 0;
  std::vector<int> dist(graph.size(), -1);
  std::vector<bool> inside(graph.size(), false);
  for (auto v : component) inside[v] = true;
  std::deque<std::size_t> queue{component.front()};
  dist[component.front()] = 0;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto w : graph[v])
      if (inside[w] && dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  int g = 0;
  for (auto v : component)
    for (auto w : graph[v])
      if (inside[w]) g = std::gcd(g, std::abs(dist[v] + 1 - dist[w]));
  return g;
}

BoolMatrix bool_multiply(const BoolMatrix& x, const BoolMatrix& y) {
  const std::size_t n = x.size();
  BoolMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (x(i, k))
        for (std::size_t j = 0; j < n; ++j)
          if (y(k, j)) out(i, j) = 1;
  return out;
}

namespace {

std::vector<int> bfs_distance(const Digraph& graph, std::size_t source) {
  std::vector<int> dist(graph.size(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto w : graph[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

}  // namespace

std::vector<bool> PeriodStructure::mask(int j) const {
  std::vector<bool> m(class_of.size(), false);
  const int jj = wrap(j);
  for (std::size_t a = 0; a < class_of.size(); ++a) m[a] = class_of[a] == jj;
  return m;
}

PeriodStructure period_from(const AdjacencyModel& model, std::size_t a0) {
  const Digraph graph = parent_to_child(model.adjacency);
  PeriodStructure ps;
  ps.a0 = a0;
  ps.distance = bfs_distance(graph, a0);

  const auto sccs = strongly_connected_components(graph);
  for (const auto& comp : sccs) {
    if (!std::binary_search(comp.begin(), comp.end(), a0)) continue;
    const int g = component_period(graph, comp);
    ps.a0_recurrent = g > 0;
    ps.period = g > 0 ? g : 1;
  }

  ps.classes.assign(static_cast<std::size_t>(ps.period), {});
  ps.class_of.assign(model.size(), -1);
  for (std::size_t a = 0; a < model.size(); ++a) {
    if (ps.distance[a] < 0) continue;
    const int c = ps.distance[a] % ps.period;
    ps.class_of[a] = c;
    ps.classes[static_cast<std::size_t>(c)].push_back(a);
  }
  return ps;
}

std::vector<std::size_t> a0_candidates(const AdjacencyModel& model) {
  const Digraph graph = parent_to_child(model.adjacency);
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < model.size(); ++a) {
    auto dist = bfs_distance(graph, a);
    if (std::all_of(dist.begin(), dist.end(), [](int x) { return x >= 0; })) out.push_back(a);
  }
  return out;
}

PeriodStructure find_a0_and_period(const AdjacencyModel& model) {
  auto candidates = a0_candidates(model);
  if (candidates.empty())
    fail(ErrorCode::Validation, "A1Violated: no symbol has every symbol among its descendants");
  return period_from(model, candidates.front());
}

bool is_irreducible(const AdjacencyModel& model) {
  const Digraph graph = parent_to_child(model.adjacency);
  const auto sccs = strongly_connected_components(graph);
  return sccs.size() == 1 && has_cycle(graph, sccs.front());
}

ReachabilityReport reachability(const AdjacencyModel& model) {
  const Digraph graph = parent_to_child(model.adjacency);
  ReachabilityReport report;
  for (std::size_t a = 0; a < model.size(); ++a) {
    auto dist = bfs_distance(graph, a);
    std::vector<std::size_t> closure;
    for (std::size_t b = 0; b < model.size(); ++b)
      if (dist[b] >= 0) closure.push_back(b);
    report.closures.push_back(std::move(closure));
  }
  report.scc_list = strongly_connected_components(graph);
  for (const auto& comp : report.scc_list)
    if (has_cycle(graph, comp)) report.recurrent.insert(report.recurrent.end(), comp.begin(), comp.end());
  std::sort(report.recurrent.begin(), report.recurrent.end());
  return report;
}

RealMatrix to_real(const BoolMatrix& adjacency) {
  RealMatrix out(adjacency.size(), 0.0);
  for (std::size_t a = 0; a < adjacency.size(); ++a)
    for (std::size_t b = 0; b < adjacency.size(); ++b) out(a, b) = adjacency(a, b) ? 1.0 : 0.0;
  return out;
}

namespace {

// Perron root of an irreducible block via power iteration on B + cI, which is
// primitive and shares the Perron vector of B. The bracket is Collatz-Wielandt
// on B itself.
double block_log_perron(const RealMatrix& w, const std::vector<std::size_t>& block, const SpectralOptions& opt) {
  const std::size_t k = block.size();
  double shift = 0.0;
  for (auto a : block)
    for (auto b : block) shift = std::max(shift, w(a, b));
  std::vector<double> x(k, 1.0), bx(k), next(k);
  double lo = 0.0, hi = kInf;
  for (int it = 0; it < opt.max_iter; ++it) {
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += w(block[i], block[j]) * x[j];
      bx[i] = s;
    }
    lo = kInf;
    hi = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double ratio = bx[i] / x[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (lo > 0.0 && std::log(hi) - std::log(lo) < opt.tolerance) return 0.5 * (std::log(hi) + std::log(lo));
    double norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      next[i] = bx[i] + shift * x[i];
      norm += next[i];
    }
    for (std::size_t i = 0; i < k; ++i) x[i] = next[i] / norm;
  }
  std::ostringstream os;
  os.precision(17);
  os << "NoConvergence: spectral radius bracket [" << lo << ", " << hi << "] after " << opt.max_iter
     << " iterations";
  fail(ErrorCode::Numeric, os.str());
}

}  // namespace

double linear_spectral_radius(const RealMatrix& weights, const SpectralOptions& options) {
  const std::size_t n = weights.size();
  Digraph graph(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (weights(a, b) < 0.0) fail(ErrorCode::Validation, "linear_spectral_radius: negative entry");
      if (weights(a, b) > 0.0) graph[b].push_back(a);
    }
  double best = kNegInf;
  for (const auto& comp : strongly_connected_components(graph)) {
    if (!has_cycle(graph, comp)) continue;
    best = std::max(best, block_log_perron(weights, comp, options));
  }
  return best;
}

double linear_spectral_radius(const BoolMatrix& adjacency, const SpectralOptions& options) {
  return linear_spectral_radius(to_real(adjacency), options);
}

}  // namespace treeshift
