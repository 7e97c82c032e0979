#pragma once

// Exact ground truth for small trees: block enumeration, type classes with
// big-integer multiplicities, the exact law of the sample mean and the
// finite-depth Chernoff bound.

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "treeshift/rate_function.hpp"
#include "treeshift/tree_core.hpp"

namespace treeshift {

using BigInt = boost::multiprecision::cpp_int;

/// c_{k+1}(a) = (sum_b A(b, a) c_k(b))^d with c_0 = 1, exactly.
std::vector<BigInt> recursion_counts(const AdjacencyModel& model, int n);

struct BlockEnumeration {
  /// counts[a] = number of admissible depth-n trees with root a.
  std::vector<BigInt> counts;
  /// Filled only when listing was requested.
  std::vector<LabeledTree> trees;
};

/// Explicit depth-first enumeration of admissible labeled trees. Throws
/// Error(Resource) "TooLarge" past limits.max_block_listing trees.
BlockEnumeration enumerate_blocks(const AdjacencyModel& model, int n, std::optional<std::size_t> root = std::nullopt,
                                  bool list = false, const Limits& limits = {});

using CountMatrix = Matrix<std::uint64_t>;

struct TypeClass {
  /// level_counts[i][a] = N^(i)_a.
  std::vector<std::vector<std::uint64_t>> level_counts;
  /// edge_counts[i](a, b) = children labeled a under level-i parents labeled b.
  std::vector<CountMatrix> edge_counts;
  BigInt count;
  /// log probability of the class under M given the root.
  double log_prob = kNegInf;

  EmpiricalPair empirical(const AdjacencyModel& model) const;
  /// Sum over levels and edges of k log W, divided by |Lambda(n)|.
  double mean(const WeightMatrix& log_w, int d) const;
};

/// All type classes of depth-n trees rooted at `root`. M may be empty, in
/// which case log_prob is left at -inf.
std::vector<TypeClass> enumerate_type_classes(const AdjacencyModel& model, const RealMatrix& M, int n,
                                              std::size_t root, const Limits& limits = {});

struct MeanAtom {
  /// Edge counts per distinct weight value other than 1, in order of first
  /// appearance in row-major order of W.
  std::vector<std::uint64_t> edge_type_counts;
  double mean = 0.0;
  double log_prob = kNegInf;
};

/// Exact law of the depth-n sample mean given the root, grouped by integer
/// count vectors over the distinct edge weights.
std::vector<MeanAtom> exact_mean_distribution(const WeightedChainModel& model, int n, std::size_t root,
                                              const Limits& limits = {});

/// log P(lo <= mean <= hi).
double log_probability_in(const std::vector<MeanAtom>& atoms, double lo, double hi);

struct FiniteRate {
  /// inf_mu (-mu alpha + sup_{a in root class} y_n(a; mu)/|Lambda(n)|); -inf when unbounded.
  double value = 0.0;
  double argmin_mu = 0.0;
};

FiniteRate finite_rate(const WeightedChainModel& model, const PeriodStructure& period, int j, int n, double alpha);

}  // namespace treeshift
