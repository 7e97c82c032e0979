#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "treeshift/oracle.hpp"
#include "treeshift/stochastic.hpp"

using namespace treeshift;

namespace {

const double kLog2 = std::log(2.0);

SampleConfig config(int depth, int trials, std::uint64_t seed, std::optional<std::size_t> root = std::size_t{0}) {
  SampleConfig c;
  c.depth = depth;
  c.trials = trials;
  c.seed = seed;
  c.root = root;
  return c;
}

double level_frequency(const LabeledTree& t, int k, std::uint32_t a) {
  const auto begin = t.shape.level_begin(k), count = t.shape.level_count(k);
  return static_cast<double>(std::count(t.labels.begin() + begin, t.labels.begin() + begin + count, a)) / count;
}

}  // namespace

TEST_CASE("counter generator") {
  CHECK(counter_uniform(1, 2, 3) == counter_uniform(1, 2, 3));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(1, 2, 4));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(2, 2, 3));
  double sum = 0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = counter_uniform(5, 0, i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("sample_tree is reproducible and admissible") {
  auto ex = fixtures::example_one();
  auto a = sample_tree(ex, config(10, 1, 42));
  auto b = sample_tree(ex, config(10, 1, 42));
  CHECK(a.labels == b.labels);
  CHECK(sample_tree(ex, config(10, 1, 43)).labels != a.labels);
  CHECK(sample_tree(ex, config(10, 1, 42), 1).labels != a.labels);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto base = fixtures::random_irreducible(rng, 2 + trial % 4, 2 + trial % 2, 0.4);
    auto chain = fixtures::random_chain(rng, base);
    auto t = sample_tree(chain, config(6, 1, trial));
    CHECK(is_admissible(t, base));
  }
}

TEST_CASE("forced columns are respected") {
  auto ex = fixtures::example_one();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = sample_tree(ex, config(8, 1, seed));
    for (std::uint64_t i = 1; i < t.labels.size(); ++i)
      if (t.labels[t.shape.parent(i)] == 1) CHECK(t.labels[i] == 0);
  }
}

TEST_CASE("node cap") {
  auto c = config(30, 1, 1);
  c.limits.max_sample_nodes = 1000;
  CHECK_THROWS_AS(sample_tree(fixtures::example_one(), c), Error);
}

TEST_CASE("level frequencies approach the stationary vector") {
  auto ex = fixtures::example_one();
  const int trials = 40;
  for (int k = 10; k <= 14; ++k) {
    std::vector<double> freq;
    for (int t = 0; t < trials; ++t) freq.push_back(level_frequency(sample_tree(ex, config(14, trials, 11), t), k, 0));
    double mean = 0, var = 0;
    for (double f : freq) mean += f / trials;
    for (double f : freq) var += (f - mean) * (f - mean) / (trials - 1);
    CHECK(std::abs(mean - 2.0 / 3) < 3 * std::sqrt(var / trials));
  }
}

TEST_CASE("empirical transitions approach M") {
  auto ex = fixtures::example_one();
  auto t = sample_tree(ex, config(13, 1, 8));
  auto pair = empirical_pair(t, ex.base);
  const auto& eta = pair.trans[12];
  for (std::size_t b = 0; b < 2; ++b) {
    const double parents = pair.dists[12][b] * 4096;
    REQUIRE(parents > 0);
    for (std::size_t a = 0; a < 2; ++a) {
      const double m = ex.M(a, b);
      const double se = std::sqrt(m * (1 - m) / (2 * parents));
      CHECK(std::abs(eta(a, b) - m) <= 3 * se);
    }
  }
}

TEST_CASE("root drawn from a distribution") {
  auto ex = fixtures::example_one();
  auto c = config(1, 1, 77, std::nullopt);
  c.root_distribution = {0.25, 0.75};
  int ones = 0;
  const int n = 4000;
  for (int t = 0; t < n; ++t) ones += sample_tree(ex, c, t).labels[0] == 1;
  CHECK(std::abs(ones / static_cast<double>(n) - 0.75) < 3 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("LLN experiment on Example 1") {
  auto ex = fixtures::example_one();
  auto c = config(16, 50, 7);
  auto rep = lln_experiment(ex, c);
  CHECK(rep.generator == std::string(kGeneratorName));
  CHECK(rep.trial_means.size() == 50);
  CHECK(rep.target == doctest::Approx(kLog2 / 3));
  CHECK(std::abs(rep.empirical_mean - kLog2 / 3) < 3 * rep.standard_error);
  CHECK(rep.pass);
  for (double m : rep.trial_means) {
    CHECK(m >= 0.0);
    CHECK(m <= kLog2);
  }
}

TEST_CASE("LLN experiment is identical across thread counts") {
  auto ex = fixtures::example_one();
  auto c1 = config(12, 16, 99), c4 = c1;
  c4.threads = 4;
  auto a = lln_experiment(ex, c1), b = lln_experiment(ex, c4);
  CHECK(a.trial_means == b.trial_means);
  CHECK(a.running == b.running);
  CHECK(a.empirical_mean == b.empirical_mean);
  CHECK(a.standard_error == b.standard_error);
}

TEST_CASE("extreme example splits by depth parity") {
  auto ext = fixtures::extreme();
  auto rep = lln_experiment(ext, config(14, 3, 1));
  REQUIRE(rep.mean_by_depth.size() == 15);
  // Only edges below a 0-parent weigh log 2, and those are exactly the odd levels.
  for (int n = 1; n <= 14; ++n) {
    double odd = 0;
    for (int k = 1; k <= n; k += 2) odd += std::pow(2.0, k);
    CHECK(rep.mean_by_depth[n] == doctest::Approx(kLog2 * odd / (std::pow(2.0, n + 1) - 1)).epsilon(1e-12));
  }
  CHECK(std::abs(rep.mean_by_depth[14] - kLog2 / 3) < 1e-3);
  CHECK(std::abs(rep.mean_by_depth[13] - 2 * kLog2 / 3) < 1e-3);
  CHECK(rep.phase_targets.size() == 2);
}

TEST_CASE("all-ones weights give zero means") {
  auto flat = fixtures::uniform_chain(fixtures::full_shift(3, 2));
  auto rep = lln_experiment(flat, config(8, 10, 2));
  for (double m : rep.trial_means) CHECK(m == 0.0);
}

TEST_CASE("trial means stay within the weight range") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    auto base = fixtures::random_primitive(rng, 3, 2, 0.5);
    auto chain = fixtures::random_chain(rng, base);
    double lo = kInf, hi = kNegInf;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        if (base.adjacency(a, b)) {
          lo = std::min(lo, std::log(chain.W(a, b)));
          hi = std::max(hi, std::log(chain.W(a, b)));
        }
    for (double m : lln_experiment(chain, config(8, 5, trial)).trial_means) {
      CHECK(m >= lo);
      CHECK(m <= hi);
    }
  }
}

TEST_CASE("tail estimates") {
  auto ex = fixtures::example_one();
  auto whole = tail_estimate(ex, config(5, 200, 1), -kInf, kInf);
  for (const auto& pt : whole) {
    CHECK(pt.frequency == 1.0);
    CHECK(pt.log_rate == 0.0);
  }

  const double star = kLog2 / 3;
  auto lln = tail_estimate(ex, config(10, 400, 2), star - 0.02, star + 0.02);
  CHECK(lln[10].frequency > lln[4].frequency);
  CHECK(lln[10].frequency > 0.9);

  // Moderately rare event at depth 6 against the exact law.
  const double L = static_cast<double>(lattice_size(2, 6));
  auto atoms = exact_mean_distribution(ex, 6, 0);
  auto rare = tail_estimate(ex, config(6, 100000, 5), 0.34, 0.39).back();
  REQUIRE(rare.hits > 0);
  CHECK(std::abs(rare.log_rate - log_probability_in(atoms, 0.34, 0.39) / L) < 0.1);
  const double exact = std::exp(log_probability_in(atoms, 0.34, 0.39));
  CHECK(exact >= rare.wilson_low);
  CHECK(exact <= rare.wilson_high);

  // [0.4, 0.45] has probability near 1e-7: out of reach, but the interval must still cover it.
  auto tiny = tail_estimate(ex, config(6, 20000, 6), 0.40, 0.45).back();
  CHECK(std::exp(log_probability_in(atoms, 0.40, 0.45)) <= tiny.wilson_high);
}
