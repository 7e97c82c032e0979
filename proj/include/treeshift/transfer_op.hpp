#pragma once

// Log-domain evaluation of the nonlinear transfer operator
//   Psi_s(x)_b = (sum_a W(a, b) x_a)^s
// which maps a vector over child symbols to a vector over parent symbols, and
// of the p-fold composition L_r over an exponent vector r.

#include <vector>

#include "treeshift/alphabet_graph.hpp"

namespace treeshift {

/// log of a nonnegative vector; kNegInf marks a zero entry.
using LogVector = std::vector<double>;

LogVector class_indicator(const PeriodStructure& period, int j);

/// result_b = s * logsumexp_a(log_w(a, b) + x_a).
LogVector psi(const WeightMatrix& log_w, double s, const LogVector& x);

/// Throws Error(Validation) "BadExponent" unless r lies in (0, d]^p with product 1.
void check_exponents(const std::vector<double>& r, int d);

/// Psi_{r[j+p-1]} o ... o Psi_{r[j]} (x), exponent indices mod p.
LogVector apply_L(const WeightMatrix& log_w, const std::vector<double>& r, const LogVector& x, int rotation = 0);

/// Same on the 0/1 adjacency, after check_exponents(r, model.arity).
LogVector apply_L(const AdjacencyModel& model, const std::vector<double>& r, const LogVector& x, int rotation = 0);

struct EigenOptions {
  double tolerance = 1e-11;
  int max_iter = 10'000;
  /// Use the unrotated composition for every class.
  bool literal = false;
};

struct EigenPair {
  double log_rho = kNegInf;
  LogVector eigvec;
  int class_index = 0;
  int iterations = 0;
  /// Width of the final Collatz-Wielandt bracket.
  double residual = 0.0;
  /// False when the class splits into several recurrent blocks or a periodic one.
  bool eigvec_unique = true;
};

/// Cone eigenpair of L_r on C_j by normalized power iteration from the class
/// indicator. Throws Error(Numeric) "NoConvergence" with the best bracket.
EigenPair principal_eigenpair(const AdjacencyModel& model, const PeriodStructure& period,
                              const std::vector<double>& r, int j, const EigenOptions& options = {});

struct EntropyStep {
  int n = 0;
  double value = 0.0;
};

struct EntropyResult {
  std::vector<EntropyStep> sequence;
  double h_top = 0.0;
  /// log of the exact block counts c_n(a) at the last level.
  LogVector last_log_counts;
};

/// c_0 = 1, c_{k+1} = (A^T c_k)^d; reports log(sum c_k)/|Lambda(k)| and an
/// Aitken-extrapolated limit taken along the period.
EntropyResult entropy_iterate(const AdjacencyModel& model, int n_max);

}  // namespace treeshift
