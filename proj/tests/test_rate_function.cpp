#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "treeshift/rate_function.hpp"

using namespace treeshift;

namespace {

const double kLog2 = std::log(2.0);

PeriodStructure period_of(const WeightedChainModel& m) { return find_a0_and_period(m.base); }

WeightedChainModel with_ones(WeightedChainModel m) {
  for (std::size_t a = 0; a < m.base.size(); ++a)
    for (std::size_t b = 0; b < m.base.size(); ++b) m.W(a, b) = m.base.adjacency(a, b) ? 1.0 : 0.0;
  return m;
}

// Period-two chain whose two phases have different limits.
WeightedChainModel lopsided() {
  return {fixtures::period_two(), RealMatrix::from_rows({{0.0, 1.0, 1.0}, {0.3, 0.0, 0.0}, {0.7, 0.0, 0.0}}),
          RealMatrix::from_rows({{0.0, 3.0, 1.0}, {2.0, 0.0, 0.0}, {1.0, 0.0, 0.0}})};
}

// Limit of pressure(mu)/mu as mu -> +inf (sign = 1) or -inf (sign = -1): the
// max-plus (min-plus) version of the pressure recursion, run to depth n.
// Primitive models only, so the root class is A_0 at every depth.
double tropical_endpoint(const WeightedChainModel& m, int sign, int n = 120) {
  const std::size_t k = m.base.size();
  const double d = m.base.arity;
  std::vector<double> v(k, 0.0);
  double best = sign > 0 ? kNegInf : kInf;
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(k, sign > 0 ? kNegInf : kInf);
    const double scale = (d - 1) / std::pow(d, i + 1);
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t a = 0; a < k; ++a)
        if (m.base.adjacency(a, b)) {
          const double cand = scale * std::log(m.W(a, b)) + v[a];
          next[b] = sign > 0 ? std::max(next[b], cand) : std::min(next[b], cand);
        }
    v = next;
  }
  for (double x : v) best = sign > 0 ? std::max(best, x) : std::min(best, x);
  return best;
}

}  // namespace

TEST_CASE("phi examples") {
  auto m = fixtures::example_one();
  for (double v : phi(m.M, m.M)) CHECK(v == 0.0);
  auto half = RealMatrix::from_rows({{0.5, 1.0}, {0.5, 0.0}});
  auto ones = RealMatrix::from_rows({{1.0, 1.0}, {1.0, 0.0}});
  auto f = phi(half, ones);
  CHECK(f[0] == doctest::Approx(kLog2));
  CHECK(f[1] == doctest::Approx(0.0));
  auto bad = RealMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  CHECK_THROWS_AS(phi(bad, ones), Error);
}

TEST_CASE("Gibbs inequality for phi") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 5;
    auto base = fixtures::random_model(rng, k, 2, 0.6);
    if (!satisfies_a0(base)) continue;
    auto chain = fixtures::random_chain(rng, base);
    RealMatrix P(k, 0.0);
    for (int b = 0; b < k; ++b) {
      double s = 0;
      for (int a = 0; a < k; ++a)
        if (base.adjacency(a, b)) s += (P(a, b) = u(rng) < 0.2 ? 0.0 : u(rng));
      if (s == 0) {
        for (int a = 0; a < k; ++a)
          if (base.adjacency(a, b)) s += (P(a, b) = 1.0);
      }
      for (int a = 0; a < k; ++a) P(a, b) /= s;
    }
    for (double v : phi(P, chain.M)) CHECK(v <= 1e-14);
  }
}

TEST_CASE("tilted_matrix") {
  auto m = fixtures::example_one();
  auto e0 = tilted_matrix(m, 0.0);
  auto e1 = tilted_matrix(m, 1.0);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      if (m.M(a, b) > 0) {
        CHECK(e0(a, b) == doctest::Approx(std::log(m.M(a, b))));
      } else {
        CHECK(e0(a, b) == kNegInf);
      }
    }
  CHECK(std::exp(e1(0, 0)) == doctest::Approx(0.5));
  CHECK(std::exp(e1(1, 0)) == doctest::Approx(0.5));
  CHECK(std::exp(e1(0, 1)) == doctest::Approx(2.0));
  CHECK(e1(1, 1) == kNegInf);
  for (double mu : {-50.0, -1.0, 3.0, 40.0}) {
    auto e = tilted_matrix(m, mu);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) CHECK((e(a, b) > kNegInf) == static_cast<bool>(m.base.adjacency(a, b)));
  }
}

TEST_CASE("validate rejects inconsistent chains") {
  auto m = fixtures::example_one();
  m.M(0, 0) = 0.6;
  CHECK_THROWS_AS(validate(m), Error);
  m = fixtures::example_one();
  m.W(1, 1) = 1.0;
  CHECK_THROWS_AS(validate(m), Error);
  CHECK_NOTHROW(validate(fixtures::example_one()));
}

TEST_CASE("pressure examples") {
  for (int k = 2; k <= 4; ++k) {
    auto chain = fixtures::uniform_chain(fixtures::full_shift(k, 2));
    auto ps = period_of(chain);
    for (double mu : {-3.0, 0.0, 2.5}) CHECK(std::abs(pressure(chain, ps, mu, 0).value) < 1e-12);
  }
  auto ex = fixtures::example_one();
  auto res = pressure(ex, period_of(ex), 0.0, 0);
  CHECK(std::abs(res.value) < 1e-10);
  CHECK(res.error_bound < 1e-10);
}

TEST_CASE("pressure is convex in mu and its slope is consistent") {
  for (const auto& m : {fixtures::example_one(), lopsided(), fixtures::extreme()}) {
    auto ps = period_of(m);
    for (int j = 0; j < ps.period; ++j) {
      const double h = 0.05;
      std::vector<double> vals;
      for (int i = -80; i <= 80; ++i) vals.push_back(pressure(m, ps, i * h, j).value);
      for (std::size_t i = 1; i + 1 < vals.size(); ++i) CHECK((vals[i + 1] - 2 * vals[i] + vals[i - 1]) / (h * h) >= -1e-8);
      for (double mu : {-2.0, 0.3, 1.7}) {
        const double fd = (pressure(m, ps, mu + 1e-5, j).value - pressure(m, ps, mu - 1e-5, j).value) / 2e-5;
        CHECK(std::abs(fd - pressure(m, ps, mu, j).slope) < 1e-5);
      }
    }
  }
}

TEST_CASE("pressure error bound is honored") {
  auto m = lopsided();
  auto ps = period_of(m);
  for (double mu : {-4.0, 0.5, 6.0}) {
    PressureOptions loose{1e-4, 400}, tight{1e-13, 400};
    auto a = pressure(m, ps, mu, 0, loose);
    auto b = pressure(m, ps, mu, 0, tight);
    CHECK(a.error_bound < 1e-4);
    CHECK(std::abs(a.value - b.value) <= a.error_bound);
  }
}

TEST_CASE("rate examples") {
  auto ex = fixtures::example_one();
  auto ps = period_of(ex);
  CHECK(std::abs(rate(ex, ps, 0, kLog2 / 3).rate) < 1e-6);
  auto out = rate(ex, ps, 0, 0.9);
  CHECK_FALSE(out.finite);
  CHECK(out.rate == kInf);

  auto flat = with_ones(ex);
  CHECK(std::abs(rate(flat, ps, 0, 0.0).rate) < 1e-12);
  CHECK(rate(flat, ps, 0, 0.1).rate == kInf);
  CHECK(rate(flat, ps, 0, -0.1).rate == kInf);
}

TEST_CASE("rate is nonnegative, convex and vanishes only at the LLN limit") {
  for (const auto& m : {fixtures::example_one(), lopsided()}) {
    auto ps = period_of(m);
    for (int j = 0; j < ps.period; ++j) {
      const double star = lln_limit(m, ps, j);
      CHECK(std::abs(rate(m, ps, j, star).rate) < 1e-6);
      CHECK(rate(m, ps, j, star - 0.05).rate > 1e-6);
      CHECK(rate(m, ps, j, star + 0.05).rate > 1e-6);
      auto ends = domain_endpoints(m, ps, j);
      std::vector<double> xs, ys;
      for (int i = 1; i < 60; ++i) {
        const double a = ends.alpha1 + (ends.alpha2 - ends.alpha1) * i / 60.0;
        auto r = rate(m, ps, j, a);
        CHECK(r.finite);
        CHECK(r.rate >= -1e-8);
        xs.push_back(a);
        ys.push_back(r.rate);
      }
      for (std::size_t i = 1; i + 1 < ys.size(); ++i) CHECK(ys[i + 1] - 2 * ys[i] + ys[i - 1] >= -1e-8);
    }
  }
}

TEST_CASE("domain endpoints") {
  auto ex = fixtures::example_one();
  auto ps = period_of(ex);
  auto e = domain_endpoints(ex, ps, 0);
  CHECK(std::abs(e.alpha1) < 1e-4);
  CHECK(std::abs(e.alpha2 - 2 * kLog2 / 3) < 1e-4);

  auto flat = domain_endpoints(with_ones(ex), ps, 0);
  CHECK(std::abs(flat.alpha1) < 1e-12);
  CHECK(std::abs(flat.alpha2) < 1e-12);

  // With W = 1/M the sum is deterministic given the root, so both endpoints collapse onto the phase value.
  auto ext = fixtures::extreme();
  auto pe = period_of(ext);
  for (int j = 0; j < 2; ++j) {
    auto ee = domain_endpoints(ext, pe, j);
    CHECK(std::abs(ee.alpha1 - lln_limit(ext, pe, j)) < 1e-6);
    CHECK(std::abs(ee.alpha2 - lln_limit(ext, pe, j)) < 1e-6);
  }
}

TEST_CASE("domain endpoints agree with the tropical recursion") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  int tested = 0;
  while (tested < 15) {
    auto base = fixtures::random_primitive(rng, 2 + tested % 3, 2, 0.6);
    auto chain = fixtures::random_chain(rng, base);
    for (std::size_t a = 0; a < base.size(); ++a)
      for (std::size_t b = 0; b < base.size(); ++b)
        if (base.adjacency(a, b)) chain.W(a, b) = u(rng);
    auto ps = period_of(chain);
    auto e = domain_endpoints(chain, ps, 0);
    CHECK(std::abs(e.alpha2 - tropical_endpoint(chain, 1)) < 1e-4);
    CHECK(std::abs(e.alpha1 - tropical_endpoint(chain, -1)) < 1e-4);
    ++tested;
  }
  auto ex = fixtures::example_one();
  CHECK(std::abs(tropical_endpoint(ex, 1) - 2 * kLog2 / 3) < 1e-12);
}

TEST_CASE("lln limits") {
  auto ex = fixtures::example_one();
  auto ps = period_of(ex);
  CHECK(lln_limit(ex, ps, 0) == doctest::Approx(kLog2 / 3).epsilon(1e-12));
  auto pis = phase_distributions(ex, ps);
  CHECK(pis[0][0] == doctest::Approx(2.0 / 3));
  CHECK(pis[0][1] == doctest::Approx(1.0 / 3));

  auto ext = fixtures::extreme();
  auto s = lln_summary(ext, period_of(ext));
  REQUIRE(s.phases.size() == 2);
  CHECK(std::abs(s.alpha_minus - kLog2 / 3) < 1e-8);
  CHECK(std::abs(s.alpha_plus - 2 * kLog2 / 3) < 1e-8);
  CHECK(std::abs(s.beta_minus - kLog2 / 2) < 1e-8);
  CHECK(std::abs(s.beta_plus - kLog2 / 2) < 1e-8);

  // W = M measures log-likelihood, the negated surprisal.
  auto lik = lln_summary(fixtures::extreme(false), period_of(ext));
  CHECK(std::abs(lik.alpha_minus + 2 * kLog2 / 3) < 1e-8);
  CHECK(std::abs(lik.alpha_plus + kLog2 / 3) < 1e-8);
}

TEST_CASE("phase distributions are consistent") {
  for (const auto& m : {lopsided(), fixtures::extreme()}) {
    auto ps = period_of(m);
    auto pis = phase_distributions(m, ps);
    const int p = ps.period;
    for (int k = 0; k < p; ++k) {
      double total = 0;
      for (double x : pis[k]) total += x;
      CHECK(std::abs(total - 1) < 1e-12);
      // pi^(k) = M pi^(k+1).
      const auto& nxt = pis[(k + 1) % p];
      for (std::size_t a = 0; a < m.base.size(); ++a) {
        double acc = 0;
        for (std::size_t b = 0; b < m.base.size(); ++b) acc += m.M(a, b) * nxt[b];
        CHECK(std::abs(acc - pis[k][a]) < 1e-12);
      }
    }
  }
}

TEST_CASE("rate curve for Example 1") {
  auto ex = fixtures::example_one();
  auto ps = period_of(ex);
  GridSpec grid;
  grid.points = 200;
  auto curve = rate_curve(ex, ps, 0, grid);
  REQUIRE(curve.points.size() == 200);
  const double step = curve.points[1].alpha - curve.points[0].alpha;
  CHECK(step <= 0.005);
  double lo = kInf, hi = kNegInf;
  const RatePoint* best = &curve.points.front();
  for (const auto& pt : curve.points) {
    if (pt.finite) {
      lo = std::min(lo, pt.alpha);
      hi = std::max(hi, pt.alpha);
      if (pt.rate < best->rate) best = &pt;
    }
  }
  CHECK(std::abs(lo - 0.0) <= step);
  CHECK(std::abs(hi - 2 * kLog2 / 3) <= step);
  CHECK(std::abs(best->alpha - kLog2 / 3) <= step);
  CHECK(curve.alpha_star == doctest::Approx(kLog2 / 3));
}

TEST_CASE("two-phase curves and their maximum") {
  auto m = lopsided();
  auto ps = period_of(m);
  GridSpec grid;
  grid.points = 60;
  auto c0 = rate_curve(m, ps, 0, grid);
  auto c1 = rate_curve(m, ps, 1, grid);
  CHECK(std::abs(c0.alpha_star - c1.alpha_star) > 1e-3);
  // Unconditional rate as pointwise max is convex wherever finite.
  auto e0 = domain_endpoints(m, ps, 0), e1 = domain_endpoints(m, ps, 1);
  const double lo = std::max(e0.alpha1, e1.alpha1), hi = std::min(e0.alpha2, e1.alpha2);
  REQUIRE(lo < hi);
  std::vector<double> ys;
  for (int i = 1; i < 40; ++i) {
    const double a = lo + (hi - lo) * i / 40.0;
    ys.push_back(std::max(rate(m, ps, 0, a).rate, rate(m, ps, 1, a).rate));
  }
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) CHECK(ys[i + 1] - 2 * ys[i] + ys[i - 1] >= -1e-8);
}

TEST_CASE("symmetric model gives a symmetric curve") {
  // Swapping the two symbols turns W into 1/W, so alpha maps to -alpha.
  WeightedChainModel m{fixtures::full_shift(2, 2), RealMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                       RealMatrix::from_rows({{2.0, 1.0}, {1.0, 0.5}})};
  auto ps = period_of(m);
  for (double a : {0.0, 0.05, 0.1, 0.2}) {
    auto plus = rate(m, ps, 0, a), minus = rate(m, ps, 0, -a);
    CHECK(std::abs(plus.rate - minus.rate) < 1e-8);
  }
  auto e = domain_endpoints(m, ps, 0);
  CHECK(std::abs(e.alpha1 + e.alpha2) < 1e-6);
}

TEST_CASE("rate curve does not depend on the thread count") {
  auto ex = fixtures::example_one();
  auto ps = period_of(ex);
  GridSpec one, four;
  one.points = four.points = 40;
  four.threads = 4;
  auto a = rate_curve(ex, ps, 0, one), b = rate_curve(ex, ps, 0, four);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].alpha == b.points[i].alpha);
    CHECK(a.points[i].rate == b.points[i].rate);
  }
}
