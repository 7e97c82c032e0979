#pragma once

// Monte Carlo sampling of tree-indexed Markov chains. Every node draws its
// label from a counter-based hash of (seed, trial, node index), so results do
// not depend on the order of evaluation or on the number of threads.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treeshift/rate_function.hpp"
#include "treeshift/tree_core.hpp"

namespace treeshift {

inline constexpr const char* kGeneratorName = "splitmix64-counter";

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0, 1) for one (seed, trial, node) triple.
double counter_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t node);

struct SampleConfig {
  int depth = 10;
  int trials = 1;
  std::uint64_t seed = 1;
  /// Fixed root symbol; when absent the root is drawn from root_distribution.
  std::optional<std::size_t> root;
  std::vector<double> root_distribution;
  int threads = 1;
  Limits limits;
};

/// Samples a full tree for one trial. Throws Error(Resource) past the node cap.
LabeledTree sample_tree(const WeightedChainModel& model, const SampleConfig& config, std::uint64_t trial = 0);

struct ExperimentReport {
  std::string generator = kGeneratorName;
  /// Sample mean at the final depth, per trial.
  std::vector<double> trial_means;
  /// running[t][k] = sample mean of trial t over Lambda(k).
  std::vector<std::vector<double>> running;
  /// Across-trial average of running means per depth.
  std::vector<double> mean_by_depth;
  double empirical_mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> phase_targets;
  double target = 0.0;
  double z_score = 0.0;
  bool pass = false;
};

/// Streams levels, so depths beyond the full-tree cap remain feasible.
ExperimentReport lln_experiment(const WeightedChainModel& model, const SampleConfig& config);

struct TailPoint {
  int depth = 0;
  std::uint64_t hits = 0;
  double frequency = 0.0;
  /// log(frequency)/|Lambda(depth)|, -inf without hits.
  double log_rate = kNegInf;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

/// Frequency of lo <= mean <= hi per depth across trials.
std::vector<TailPoint> tail_estimate(const WeightedChainModel& model, const SampleConfig& config, double lo,
                                     double hi);

}  // namespace treeshift
