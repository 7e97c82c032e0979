#pragma once

// Symbolic model of a Markov hom tree-shift: alphabet, 0/1 adjacency and tree
// arity, plus the graph-theoretic structure derived from it.
//
// ORIENTATION: adjacency(a, b) == 1 means symbol `a` may appear as a CHILD of a
// node labeled `b`. Rows are children, columns are parents. The induced
// digraph used for reachability has an edge b -> a (parent to child) for every
// such entry. Every routine in this library follows this convention.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "treeshift/common.hpp"

namespace treeshift {

struct AdjacencyModel {
  std::vector<std::string> symbols;
  BoolMatrix adjacency;
  int arity = 2;

  std::size_t size() const noexcept { return symbols.size(); }
  bool allows(std::size_t child, std::size_t parent) const { return adjacency(child, parent) != 0; }
};

/// Checks shape, 0/1 entries, unique names and d >= 2. Throws Error(Validation).
void validate(const AdjacencyModel& model, const Limits& limits = {});

/// True when every parent symbol admits at least one child.
bool satisfies_a0(const AdjacencyModel& model);

/// Principal submatrix on the given symbol indices (kept in the given order).
AdjacencyModel submodel(const AdjacencyModel& model, const std::vector<std::size_t>& keep);

/// Indices kept by reduce_a0, in increasing order.
std::vector<std::size_t> reduce_a0_indices(const AdjacencyModel& model);

/// Maximal principal submatrix whose columns are all nonzero. Throws
/// Error(Validation) with an "EmptyModel" message if nothing survives.
AdjacencyModel reduce_a0(const AdjacencyModel& model);

struct PeriodStructure {
  std::size_t a0 = 0;
  int period = 1;
  /// False when a0 lies on no cycle; the period is then reported as 1.
  bool a0_recurrent = true;
  std::vector<std::vector<std::size_t>> classes;
  /// Class index per symbol, -1 for symbols not reachable from a0.
  std::vector<int> class_of;
  /// BFS distance from a0 in the parent -> child digraph, -1 if unreachable.
  std::vector<int> distance;

  std::vector<bool> mask(int j) const;
  int wrap(int j) const { return ((j % period) + period) % period; }
};

/// Period and cyclic classes seen from a fixed root symbol.
PeriodStructure period_from(const AdjacencyModel& model, std::size_t a0);

/// Smallest a0 that reaches every symbol, its period and classes. Throws
/// Error(Validation) with an "A1Violated" message when no such symbol exists.
PeriodStructure find_a0_and_period(const AdjacencyModel& model);

/// Symbols from which every symbol is reachable.
std::vector<std::size_t> a0_candidates(const AdjacencyModel& model);

bool is_irreducible(const AdjacencyModel& model);

struct ReachabilityReport {
  /// closures[a] = A^(a): a together with all of its descendants, sorted.
  std::vector<std::vector<std::size_t>> closures;
  /// Symbols lying on a directed cycle.
  std::vector<std::size_t> recurrent;
  std::vector<std::vector<std::size_t>> scc_list;
};

ReachabilityReport reachability(const AdjacencyModel& model);

// ---- generic digraph helpers -------------------------------------------------

using Digraph = std::vector<std::vector<std::size_t>>;

/// Parent -> child successor lists induced by the adjacency.
Digraph parent_to_child(const BoolMatrix& adjacency);

/// Tarjan SCCs; each component sorted, components in reverse topological order.
std::vector<std::vector<std::size_t>> strongly_connected_components(const Digraph& graph);

/// True if the component has at least one internal edge (a cycle).
bool has_cycle(const Digraph& graph, const std::vector<std::size_t>& component);

/// gcd of cycle lengths inside a strongly connected component (0 if acyclic).
int component_period(const Digraph& graph, const std::vector<std::size_t>& component);

/// Boolean matrix product in the saturating {0,1} semiring.
BoolMatrix bool_multiply(const BoolMatrix& x, const BoolMatrix& y);

// ---- linear spectral quantities ----------------------------------------------

struct SpectralOptions {
  double tolerance = 1e-12;
  int max_iter = 100'000;
};

/// log of the spectral radius of a nonnegative matrix; -inf when nilpotent.
/// Reducible inputs are split into strongly connected blocks.
double linear_spectral_radius(const RealMatrix& weights, const SpectralOptions& options = {});
double linear_spectral_radius(const BoolMatrix& adjacency, const SpectralOptions& options = {});

RealMatrix to_real(const BoolMatrix& adjacency);

}  // namespace treeshift
