#pragma once

// Finite rooted d-trees stored breadth first. Node i has children
// d*i+1 .. d*i+d, level k occupies indices [(d^k-1)/(d-1), (d^{k+1}-1)/(d-1)).

#include <cstdint>
#include <vector>

#include "treeshift/alphabet_graph.hpp"

namespace treeshift {

/// |Lambda(n)| = (d^{n+1}-1)/(d-1). Throws Error(Resource) past 2^63-1.
std::uint64_t lattice_size(int d, int n);

/// |Lambda(n)| as a double, for normalizations past the integer range.
double lattice_size_real(int d, int n);

/// d^k with the same overflow guard.
std::uint64_t level_size(int d, int k);

struct TreeShape {
  int arity = 2;
  int depth = 0;

  std::uint64_t nodes() const { return lattice_size(arity, depth); }
  std::uint64_t level_begin(int k) const { return k == 0 ? 0 : lattice_size(arity, k - 1); }
  std::uint64_t level_count(int k) const { return level_size(arity, k); }
  std::uint64_t parent(std::uint64_t i) const { return (i - 1) / static_cast<std::uint64_t>(arity); }
  std::uint64_t child(std::uint64_t i, int c) const { return static_cast<std::uint64_t>(arity) * i + 1 + c; }
};

/// Shape checked against the node cap in limits.
TreeShape make_shape(int d, int n, const Limits& limits = {});

struct LabeledTree {
  TreeShape shape;
  std::vector<std::uint32_t> labels;
};

/// First edge violating the adjacency, as (child node, parent node); none if admissible.
struct EdgeViolation {
  std::uint64_t child = 0;
  std::uint64_t parent = 0;
};
bool is_admissible(const LabeledTree& t, const AdjacencyModel& model, EdgeViolation* where = nullptr);

struct EmpiricalPair {
  /// dists[k][a] = fraction of level-k nodes labeled a.
  std::vector<std::vector<double>> dists;
  /// trans[k](a, b) = fraction of children of level-k b-nodes labeled a.
  std::vector<RealMatrix> trans;
};

/// Level distributions and transitions. Columns of parents absent at a level
/// fall back to the normalized adjacency column. Throws Error(Validation) on
/// an inadmissible tree.
EmpiricalPair empirical_pair(const LabeledTree& t, const AdjacencyModel& model);

/// (1/|Lambda(n)|) sum over non-root g in Lambda(n) of logW(t_g, t_parent(g)).
double sample_mean(const LabeledTree& t, const WeightMatrix& log_w, int n);

/// Same quantity rebuilt from the empirical pair level by level.
double level_decomposed_mean(const EmpiricalPair& pair, const WeightMatrix& log_w, int d, int n);

struct TreeDistance {
  double value = 0.0;
  /// True when the trees agree on every stored level.
  bool truncated = false;
};

/// exp(-|Lambda(n*)|) with n* the deepest level of agreement; 1 on root mismatch.
TreeDistance tree_metric(const LabeledTree& x, const LabeledTree& y);

}  // namespace treeshift
