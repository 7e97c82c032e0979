#include "treeshift/tree_core.hpp"

#include <limits>
#include <sstream>

namespace treeshift {

std::uint64_t level_size(int d, int k) {
  if (d < 1 || k < 0) fail(ErrorCode::Validation, "level_size: need d >= 1 and k >= 0");
  constexpr std::uint64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::uint64_t v = 1;
  for (int i = 0; i < k; ++i) {
    if (v > kMax / static_cast<std::uint64_t>(d)) fail(ErrorCode::Resource, "Overflow: d^k exceeds 2^63-1");
    v *= static_cast<std::uint64_t>(d);
  }
  return v;
}

std::uint64_t lattice_size(int d, int n) {
  if (d < 2 || n < 0) fail(ErrorCode::Validation, "lattice_size: need d >= 2 and n >= 0");
  constexpr std::uint64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::uint64_t total = 0, level = 1;
  for (int k = 0; k <= n; ++k) {
    if (total > kMax - level) fail(ErrorCode::Resource, "Overflow: |Lambda(n)| exceeds 2^63-1");
    total += level;
    if (k < n) {
      if (level > kMax / static_cast<std::uint64_t>(d)) fail(ErrorCode::Resource, "Overflow: |Lambda(n)| exceeds 2^63-1");
      level *= static_cast<std::uint64_t>(d);
    }
  }
  return total;
}

double lattice_size_real(int d, int n) {
  if (d < 2 || n < 0) fail(ErrorCode::Validation, "lattice_size: need d >= 2 and n >= 0");
  return (std::pow(static_cast<double>(d), n + 1) - 1.0) / (d - 1.0);
}

TreeShape make_shape(int d, int n, const Limits& limits) {
  TreeShape shape{d, n};
  const auto nodes = lattice_size(d, n);
  if (nodes > limits.max_tree_nodes) {
    std::ostringstream os;
    os << "tree with d=" << d << ", depth " << n << " has " << nodes << " nodes, above the cap of "
       << limits.max_tree_nodes;
    fail(ErrorCode::Resource, os.str());
  }
  return shape;
}

bool is_admissible(const LabeledTree& t, const AdjacencyModel& model, EdgeViolation* where) {
  for (std::uint64_t i = 1; i < t.labels.size(); ++i) {
    const auto p = t.shape.parent(i);
    if (!model.allows(t.labels[i], t.labels[p])) {
      if (where) *where = {i, p};
      return false;
    }
  }
  return true;
}

EmpiricalPair empirical_pair(const LabeledTree& t, const AdjacencyModel& model) {
  EdgeViolation bad;
  if (!is_admissible(t, model, &bad)) {
    std::ostringstream os;
    os << "InadmissibleTree: node " << bad.child << " under node " << bad.parent;
    fail(ErrorCode::Validation, os.str());
  }
  const std::size_t n_sym = model.size();
  const int n = t.shape.depth;
  EmpiricalPair out;
  for (int k = 0; k <= n; ++k) {
    std::vector<double> dist(n_sym, 0.0);
    const auto begin = t.shape.level_begin(k), count = t.shape.level_count(k);
    for (std::uint64_t i = begin; i < begin + count; ++i) dist[t.labels[i]] += 1.0;
    for (auto& v : dist) v /= static_cast<double>(count);
    out.dists.push_back(std::move(dist));
  }
  for (int k = 0; k < n; ++k) {
    RealMatrix counts(n_sym, 0.0);
    std::vector<double> parents(n_sym, 0.0);
    const auto begin = t.shape.level_begin(k), count = t.shape.level_count(k);
    for (std::uint64_t i = begin; i < begin + count; ++i) {
      const auto b = t.labels[i];
      parents[b] += t.shape.arity;
      for (int c = 0; c < t.shape.arity; ++c) counts(t.labels[t.shape.child(i, c)], b) += 1.0;
    }
    for (std::size_t b = 0; b < n_sym; ++b) {
      if (parents[b] > 0.0) {
        for (std::size_t a = 0; a < n_sym; ++a) counts(a, b) /= parents[b];
        continue;
      }
      double col = 0.0;
      for (std::size_t a = 0; a < n_sym; ++a) col += model.adjacency(a, b);
      for (std::size_t a = 0; a < n_sym; ++a) counts(a, b) = col > 0.0 ? model.adjacency(a, b) / col : 0.0;
    }
    out.trans.push_back(std::move(counts));
  }
  return out;
}

double sample_mean(const LabeledTree& t, const WeightMatrix& log_w, int n) {
  if (n > t.shape.depth) fail(ErrorCode::Validation, "sample_mean: depth exceeds stored tree");
  const auto total = lattice_size(t.shape.arity, n);
  double sum = 0.0;
  for (std::uint64_t i = 1; i < total; ++i) {
    const double w = log_w(t.labels[i], t.labels[t.shape.parent(i)]);
    if (w == kNegInf) {
      std::ostringstream os;
      os << "SupportMismatch: zero weight on the edge into node " << i;
      fail(ErrorCode::Validation, os.str());
    }
    sum += w;
  }
  return sum / static_cast<double>(total);
}

double level_decomposed_mean(const EmpiricalPair& pair, const WeightMatrix& log_w, int d, int n) {
  const double total = static_cast<double>(lattice_size(d, n));
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& eta = pair.trans[k];
    const auto& pi = pair.dists[k];
    double level = 0.0;
    for (std::size_t b = 0; b < pi.size(); ++b) {
      if (pi[b] == 0.0) continue;
      for (std::size_t a = 0; a < pi.size(); ++a)
        if (eta(a, b) != 0.0) level += eta(a, b) * log_w(a, b) * pi[b];
    }
    sum += static_cast<double>(level_size(d, k + 1)) * level;
  }
  return sum / total;
}

TreeDistance tree_metric(const LabeledTree& x, const LabeledTree& y) {
  if (x.shape.arity != y.shape.arity || x.shape.depth != y.shape.depth || x.labels.size() != y.labels.size())
    fail(ErrorCode::Validation, "ShapeMismatch: trees have different arity or depth");
  if (x.labels.empty() || x.labels[0] != y.labels[0]) return {1.0, false};
  int agree = 0;
  for (int k = 1; k <= x.shape.depth; ++k) {
    const auto begin = x.shape.level_begin(k), count = x.shape.level_count(k);
    for (std::uint64_t i = begin; i < begin + count; ++i)
      if (x.labels[i] != y.labels[i]) return {std::exp(-static_cast<double>(lattice_size(x.shape.arity, agree))), false};
    agree = k;
  }
  return {0.0, true};
}

}  // namespace treeshift
