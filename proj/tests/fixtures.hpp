#pragma once

#include <cmath>
#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "treeshift/rate_function.hpp"

namespace fixtures {

using namespace treeshift;

inline AdjacencyModel model(const std::vector<std::vector<std::uint8_t>>& rows, int d) {
  AdjacencyModel m;
  m.arity = d;
  for (std::size_t a = 0; a < rows.size(); ++a) m.symbols.push_back(std::to_string(a));
  m.adjacency = BoolMatrix::from_rows(rows);
  return m;
}

inline AdjacencyModel nine_by_nine() {
  return model({{0, 0, 0, 0, 1, 1, 0, 0, 0},
                {0, 0, 0, 1, 0, 0, 0, 0, 0},
                {0, 0, 0, 0, 0, 1, 0, 0, 0},
                {0, 0, 0, 0, 0, 0, 0, 1, 1},
                {0, 0, 0, 0, 0, 0, 0, 0, 1},
                {0, 0, 0, 0, 0, 0, 1, 0, 0},
                {0, 1, 1, 0, 0, 0, 0, 0, 0},
                {1, 0, 1, 0, 0, 0, 0, 0, 0},
                {1, 0, 0, 0, 0, 0, 0, 0, 0}},
               3);
}

inline AdjacencyModel period_two() { return model({{0, 1, 1}, {1, 0, 0}, {1, 0, 0}}, 2); }
inline AdjacencyModel golden_mean() { return model({{1, 1}, {1, 0}}, 2); }
inline AdjacencyModel swap() { return model({{0, 1}, {1, 0}}, 2); }

inline AdjacencyModel full_shift(int k, int d) {
  return model(std::vector<std::vector<std::uint8_t>>(k, std::vector<std::uint8_t>(k, 1)), d);
}

/// M = [[1/2, 1], [1/2, 0]], W = [[1, 2], [1, 0]]: the sample mean counts
/// (1 <- 0) edges with weight log 2.
inline WeightedChainModel example_one() {
  return {golden_mean(), RealMatrix::from_rows({{0.5, 1.0}, {0.5, 0.0}}), RealMatrix::from_rows({{1.0, 2.0}, {1.0, 0.0}})};
}

/// Period-2 chain with W = 1/M, the surprisal of each step.
inline WeightedChainModel extreme(bool surprisal = true) {
  const auto M = RealMatrix::from_rows({{0.0, 1.0, 1.0}, {0.5, 0.0, 0.0}, {0.5, 0.0, 0.0}});
  RealMatrix W(3, 0.0);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      if (M(a, b) > 0.0) W(a, b) = surprisal ? 1.0 / M(a, b) : M(a, b);
  return {period_two(), M, W};
}

/// Uniform transitions with all-ones weights.
inline WeightedChainModel uniform_chain(const AdjacencyModel& m) {
  WeightedChainModel c{m, RealMatrix(m.size(), 0.0), RealMatrix(m.size(), 0.0)};
  for (std::size_t b = 0; b < m.size(); ++b) {
    double col = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a) col += m.adjacency(a, b);
    for (std::size_t a = 0; a < m.size(); ++a)
      if (m.adjacency(a, b)) {
        c.M(a, b) = 1.0 / col;
        c.W(a, b) = 1.0;
      }
  }
  return c;
}

/// Random 0/1 matrix with the given density; may violate every assumption.
inline AdjacencyModel random_model(std::mt19937_64& rng, int k, int d, double density) {
  std::bernoulli_distribution bit(density);
  AdjacencyModel m;
  m.arity = d;
  m.adjacency = BoolMatrix(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    m.symbols.push_back(std::to_string(a));
    for (int b = 0; b < k; ++b) m.adjacency(a, b) = bit(rng) ? 1 : 0;
  }
  return m;
}

/// Random irreducible matrix (resampled until strongly connected).
inline AdjacencyModel random_irreducible(std::mt19937_64& rng, int k, int d, double density);

/// Random primitive matrix: irreducible with period 1.
inline AdjacencyModel random_primitive(std::mt19937_64& rng, int k, int d, double density);

/// Random column-stochastic M on the support of m, and random positive W.
inline WeightedChainModel random_chain(std::mt19937_64& rng, const AdjacencyModel& m) {
  std::uniform_real_distribution<double> u(0.1, 1.0), w(0.2, 3.0);
  WeightedChainModel c{m, RealMatrix(m.size(), 0.0), RealMatrix(m.size(), 0.0)};
  for (std::size_t b = 0; b < m.size(); ++b) {
    double col = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a)
      if (m.adjacency(a, b)) col += (c.M(a, b) = u(rng));
    for (std::size_t a = 0; a < m.size(); ++a)
      if (m.adjacency(a, b)) {
        c.M(a, b) /= col;
        c.W(a, b) = w(rng);
      }
  }
  return c;
}

}  // namespace fixtures

#include "treeshift/alphabet_graph.hpp"

namespace fixtures {

inline AdjacencyModel random_irreducible(std::mt19937_64& rng, int k, int d, double density) {
  for (;;) {
    auto m = random_model(rng, k, d, density);
    if (is_irreducible(m)) return m;
  }
}

inline AdjacencyModel random_primitive(std::mt19937_64& rng, int k, int d, double density) {
  for (;;) {
    auto m = random_irreducible(rng, k, d, density);
    if (find_a0_and_period(m).period == 1) return m;
  }
}

// Perron root of a nonnegative primitive matrix by Collatz-Wielandt bounds,
// computed with a plain power iteration on y = B x.
inline double perron_log(const RealMatrix& b) {
  const std::size_t k = b.size();
  std::vector<double> x(k, 1.0);
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> y(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) y[i] += b(i, j) * x[j];
    double lo = kInf, hi = 0;
    for (std::size_t i = 0; i < k; ++i) {
      lo = std::min(lo, y[i] / x[i]);
      hi = std::max(hi, y[i] / x[i]);
    }
    const double norm = *std::max_element(y.begin(), y.end());
    for (std::size_t i = 0; i < k; ++i) x[i] = y[i] / norm;
    if (std::log(hi) - std::log(lo) < 1e-13) return 0.5 * (std::log(hi) + std::log(lo));
  }
  throw std::runtime_error("perron_log did not converge");
}

}  // namespace fixtures
