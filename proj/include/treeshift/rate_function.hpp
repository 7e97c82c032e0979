#pragma once

// Pressure recursion, rate function and LLN limits for the tree sample mean
//   (1/|Lambda(n)|) sum_{g != root} log W(X_g, X_parent(g))
// of a tree-indexed Markov chain with column-stochastic transition M.

#include <vector>

#include "treeshift/alphabet_graph.hpp"
#include "treeshift/transfer_op.hpp"

namespace treeshift {

struct WeightedChainModel {
  AdjacencyModel base;
  /// Column stochastic, child row, parent column.
  RealMatrix M;
  /// Positive exactly on the support of the adjacency.
  RealMatrix W;
};

/// Support and stochasticity checks. Throws Error(Validation).
void validate(const WeightedChainModel& model);

/// Phi(P|W)_b = sum_a -P(a,b) log(P(a,b)/W(a,b)), with 0 log(0/0) = 0.
std::vector<double> phi(const RealMatrix& P, const RealMatrix& W);

/// log(M) + mu log(W) on the support, -inf elsewhere.
WeightMatrix tilted_matrix(const WeightedChainModel& model, double mu);

struct PressureOptions {
  double tolerance = 1e-10;
  int max_n = 400;
};

struct PressureResult {
  double mu = 0.0;
  double value = 0.0;
  /// d value / d mu of the truncated recursion.
  double slope = 0.0;
  int iterations = 0;
  double error_bound = 0.0;
};

/// lambda^(0) = 0, lambda^(i+1) = (1/t) log(E^T exp(t lambda^(i))) with
/// t = d^{i+1}/(d-1), evaluated at depths n = j (mod p) and maximized over the
/// root class A_0 once C d^{-n} (|mu|+2) < tolerance.
PressureResult pressure(const WeightedChainModel& model, const PeriodStructure& period, double mu, int j,
                        const PressureOptions& options = {});

struct RatePoint {
  double alpha = 0.0;
  /// kInf outside the finiteness domain.
  double rate = 0.0;
  double argmax_mu = 0.0;
  bool finite = true;
};

struct RateOptions {
  PressureOptions pressure;
  int max_doublings = 40;
  double mu_big = 1e3;
  double endpoint_tolerance = 1e-6;
};

RatePoint rate(const WeightedChainModel& model, const PeriodStructure& period, int j, double alpha,
               const RateOptions& options = {});

struct DomainEndpoints {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

/// Limits of the pressure slope as mu -> -inf and mu -> +inf.
DomainEndpoints domain_endpoints(const WeightedChainModel& model, const PeriodStructure& period, int j,
                                 const RateOptions& options = {});

/// pi^(k) for k = 0..p-1: pi^(0) is the stationary vector of M^p on A_0 and
/// pi^(k) = M pi^(k+1) (indices mod p), so pi^(k) lives on A_{-k}.
std::vector<std::vector<double>> phase_distributions(const WeightedChainModel& model, const PeriodStructure& period);

/// LLN limit of the sample mean along depths n = j (mod p), root a0.
double lln_limit(const WeightedChainModel& model, const PeriodStructure& period, int j);

struct LlnSummary {
  std::vector<double> phases;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double beta_minus = 0.0;
  double beta_plus = 0.0;
  std::vector<double> stationary;
};

/// All phases plus the bounds for a stationary root.
LlnSummary lln_summary(const WeightedChainModel& model, const PeriodStructure& period);

struct GridSpec {
  int points = 200;
  double margin = 0.05;
  int threads = 1;
};

struct RateCurve {
  int class_index = 0;
  DomainEndpoints endpoints;
  double alpha_star = 0.0;
  std::vector<RatePoint> points;
};

RateCurve rate_curve(const WeightedChainModel& model, const PeriodStructure& period, int j, const GridSpec& grid,
                     const RateOptions& options = {});

}  // namespace treeshift
