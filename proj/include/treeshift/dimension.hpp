#pragma once

// Hausdorff dimension of a Markov hom tree-shift by minimizing the scaled cone
// eigenvalue of L_r over exponent vectors r, parameterized by the simplex.

#include <functional>
#include <string>
#include <vector>

#include "treeshift/rate_function.hpp"
#include "treeshift/transfer_op.hpp"

namespace treeshift {

struct Ratios {
  std::vector<double> r;
  std::vector<double> q;
  /// (sum_l prod_{i<=l} 1/r_i)^{-1}, equal to q[0].
  double q0 = 0.0;
};

/// q_i = sum_j s_{i-j} d^{-j} (d^p - d^{p-1})/(d^p - 1), r_i = q_i / q_{i+1}.
Ratios simplex_to_ratios(const std::vector<double>& s, int d);

/// Inverse of simplex_to_ratios.
std::vector<double> ratios_to_simplex(const std::vector<double>& r, int d);

/// (sum_{l=0}^{p-1} prod_{i=0}^{l} 1/r_{i+j})^{-1}.
double rotated_coefficient(const std::vector<double>& r, int j);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> x);

struct DimensionOptions {
  /// 0 picks 1/50 for p <= 3, 1/12 for p <= 5, coarser beyond.
  int grid_divisions = 0;
  /// Shifts the grid by this fraction of a cell (reproducibility checks).
  double grid_phase = 0.0;
  double nm_tolerance = 1e-10;
  int nm_max_evals = 4000;
  int nm_starts = 3;
  EigenOptions eigen;
  int entropy_depth = 40;
  int threads = 1;
  /// Also minimize for every class j and report the values.
  bool per_class = true;
  std::size_t max_grid_points = 20000;
};

double dim_objective(const AdjacencyModel& model, const PeriodStructure& period, const std::vector<double>& s, int j,
                     const EigenOptions& options = {});

struct SimplexMinimum {
  std::vector<double> s;
  double value = kInf;
  int evaluations = 0;
};

/// Grid over the simplex followed by Nelder-Mead from the best grid points.
SimplexMinimum minimize_on_simplex(int p, const std::function<double(const std::vector<double>&)>& f,
                                   const DimensionOptions& options);

struct DimensionReport {
  double dim = 0.0;
  std::vector<double> argmin_r;
  std::vector<double> argmin_s;
  std::vector<double> class_values;
  double h_top = 0.0;
  double log_rho_linear = 0.0;
  std::string method = "exact_irreducible";
  int evaluations = 0;
  int period = 1;
  bool eigvec_unique = true;
};

DimensionReport hausdorff_dimension(const AdjacencyModel& model, const DimensionOptions& options = {});

/// Maximum over recurrent symbols a of the minimized objective on the closure of a.
DimensionReport general_upper_bound(const AdjacencyModel& model, const DimensionOptions& options = {});

/// Routes to hausdorff_dimension for irreducible input, else general_upper_bound.
DimensionReport dimension(const AdjacencyModel& model, const DimensionOptions& options = {});

struct SpectralBound {
  double dim = 0.0;
  double log_rho = 0.0;
  bool bound_holds = true;
  bool constant_column_sums = false;
  bool numerically_equal = false;
};

SpectralBound spectral_bound_report(const AdjacencyModel& model, const DimensionOptions& options = {});

struct MeasureReport {
  RealMatrix M;
  std::vector<double> pi;
  /// LLN phases of -log M* under M*.
  std::vector<double> phase_values;
  double validation_value = 0.0;
  double dim = 0.0;
};

/// Markov measure whose cylinder decay attains the dimension. Throws
/// Error(Numeric) "ValidationFailed" when the phases miss dim by more than tol.
MeasureReport optimal_markov_measure(const AdjacencyModel& model, const DimensionReport& report,
                                     const DimensionOptions& options = {}, double tol = 1e-6);

}  // namespace treeshift
