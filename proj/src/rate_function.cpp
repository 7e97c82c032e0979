#include "treeshift/rate_function.hpp"

#include <algorithm>
#include <sstream>

#include "treeshift/parallel.hpp"

namespace treeshift {

void validate(const WeightedChainModel& model) {
  const std::size_t n = model.base.size();
  if (model.M.size() != n || model.W.size() != n) fail(ErrorCode::Validation, "M and W must match the alphabet size");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const bool edge = model.base.allows(a, b);
      std::ostringstream where;
      where << "[" << a << "][" << b << "]";
      if (!(model.M(a, b) >= 0.0) || !(model.W(a, b) >= 0.0) || !std::isfinite(model.M(a, b)) ||
          !std::isfinite(model.W(a, b)))
        fail(ErrorCode::Validation, "M and W must be finite and nonnegative at " + where.str());
      if ((model.M(a, b) > 0.0) != edge) fail(ErrorCode::Validation, "support of M differs from adjacency at " + where.str());
      if ((model.W(a, b) > 0.0) != edge) fail(ErrorCode::Validation, "support of W differs from adjacency at " + where.str());
    }
  for (std::size_t b = 0; b < n; ++b) {
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) sum += model.M(a, b);
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "column " << b << " of M sums to " << sum << ", expected 1";
      fail(ErrorCode::Validation, os.str());
    }
  }
}

std::vector<double> phi(const RealMatrix& P, const RealMatrix& W) {
  const std::size_t n = P.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < n; ++a) {
      const double p = P(a, b);
      if (p == 0.0) continue;
      if (W(a, b) <= 0.0) {
        std::ostringstream os;
        os << "SupportViolation: P[" << a << "][" << b << "] > 0 where W is 0";
        fail(ErrorCode::Validation, os.str());
      }
      out[b] -= p * std::log(p / W(a, b));
    }
  return out;
}

WeightMatrix tilted_matrix(const WeightedChainModel& model, double mu) {
  const std::size_t n = model.base.size();
  WeightMatrix e(n, kNegInf);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (model.M(a, b) > 0.0) e(a, b) = std::log(model.M(a, b)) + (mu == 0.0 ? 0.0 : mu * std::log(model.W(a, b)));
  return e;
}

namespace {

double pressure_constant(const WeightedChainModel& model) {
  const std::size_t n = model.base.size();
  double c = std::log(static_cast<double>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (model.M(a, b) > 0.0) c = std::max({c, std::abs(std::log(model.M(a, b))), std::abs(std::log(model.W(a, b)))});
  return c;
}

}  // namespace

PressureResult pressure(const WeightedChainModel& model, const PeriodStructure& period, double mu, int j,
                        const PressureOptions& options) {
  const std::size_t n_sym = model.base.size();
  const double d = model.base.arity;
  const int p = period.period;
  const int jj = period.wrap(j);
  const WeightMatrix log_e = tilted_matrix(model, mu);
  WeightMatrix log_w(n_sym, 0.0);
  for (std::size_t a = 0; a < n_sym; ++a)
    for (std::size_t b = 0; b < n_sym; ++b) log_w(a, b) = model.W(a, b) > 0.0 ? std::log(model.W(a, b)) : 0.0;
  const double c = pressure_constant(model);

  std::vector<double> lambda(n_sym, 0.0), slope(n_sym, 0.0), next(n_sym), next_slope(n_sym), u(n_sym);
  const auto& root_class = period.classes[0];
  PressureResult res;
  res.mu = mu;
  for (int n = 0;; ++n) {
    if (n % p == jj) {
      res.error_bound = c * std::pow(d, -n) * (std::abs(mu) + 2.0);
      if (res.error_bound < options.tolerance || n + p > options.max_n) {
        std::size_t best = root_class.front();
        for (auto a : root_class)
          if (lambda[a] > lambda[best]) best = a;
        res.value = lambda[best];
        res.slope = slope[best];
        res.iterations = n;
        return res;
      }
    }
    // t = d^{n+1}/(d-1); lambda_b <- max_a u_a + (1/t) log sum_a exp(t (u_a - max)),
    // u_a = lambda_a + log E(a, b)/t.
    const double t = std::pow(d, n + 1) / (d - 1.0);
    for (std::size_t b = 0; b < n_sym; ++b) {
      double top = kNegInf;
      for (std::size_t a = 0; a < n_sym; ++a) {
        u[a] = log_e(a, b) == kNegInf ? kNegInf : lambda[a] + log_e(a, b) / t;
        top = std::max(top, u[a]);
      }
      if (top == kNegInf) {
        next[b] = kNegInf;
        next_slope[b] = 0.0;
        continue;
      }
      double sum = 0.0, dsum = 0.0;
      for (std::size_t a = 0; a < n_sym; ++a) {
        if (u[a] == kNegInf) continue;
        const double w = std::exp(t * (u[a] - top));
        sum += w;
        dsum += w * (log_w(a, b) / t + slope[a]);
      }
      next[b] = top + std::log(sum) / t;
      next_slope[b] = dsum / sum;
    }
    lambda.swap(next);
    slope.swap(next_slope);
  }
}

RatePoint rate(const WeightedChainModel& model, const PeriodStructure& period, int j, double alpha,
               const RateOptions& options) {
  auto eval = [&](double mu) { return pressure(model, period, mu, j, options.pressure); };
  RatePoint out;
  out.alpha = alpha;

  const auto at0 = eval(0.0);
  const double g0 = alpha - at0.slope;
  if (g0 == 0.0) {
    out.rate = -at0.value;
    return out;
  }
  const double dir = g0 > 0.0 ? 1.0 : -1.0;
  double inner = 0.0, outer = 0.0;
  double best = -at0.value;
  PressureResult last = at0;
  bool bracketed = false;
  for (int k = 0; k <= options.max_doublings; ++k) {
    const double mu = dir * std::ldexp(1.0, k);
    last = eval(mu);
    if ((alpha - last.slope) * dir <= 0.0) {
      outer = mu;
      bracketed = true;
      break;
    }
    // Gains that have died out mean alpha is the slope limit itself; the
    // supremum is finite and further doublings only add cancellation error.
    const double f = mu * alpha - last.value;
    if (f - best <= 1e-13 * std::max(1.0, std::abs(f))) {
      out.rate = std::max(best, f);
      out.argmax_mu = mu;
      return out;
    }
    best = f;
    inner = mu;
  }
  if (!bracketed) {
    // Still improving at the largest mu: alpha lies outside the slope range.
    out.rate = kInf;
    out.finite = false;
    out.argmax_mu = last.mu;
    return out;
  }
  double lo = std::min(inner, outer), hi = std::max(inner, outer);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = alpha - eval(mid).slope;
    if (g > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double mu = 0.5 * (lo + hi);
  out.argmax_mu = mu;
  out.rate = mu * alpha - eval(mu).value;
  return out;
}

DomainEndpoints domain_endpoints(const WeightedChainModel& model, const PeriodStructure& period, int j,
                                 const RateOptions& options) {
  auto limit_slope = [&](double sign) {
    double mu = options.mu_big;
    double s = pressure(model, period, sign * mu, j, options.pressure).slope;
    for (int k = 0; k < options.max_doublings; ++k) {
      mu *= 2.0;
      const double s2 = pressure(model, period, sign * mu, j, options.pressure).slope;
      const bool stable = std::abs(s2 - s) < options.endpoint_tolerance;
      s = s2;
      if (stable || mu > std::ldexp(1.0, options.max_doublings)) break;
    }
    return s;
  };
  return {limit_slope(-1.0), limit_slope(1.0)};
}

namespace {

std::vector<double> apply_matrix(const RealMatrix& m, const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t b = 0; b < v.size(); ++b) {
    if (v[b] == 0.0) continue;
    for (std::size_t a = 0; a < v.size(); ++a) out[a] += m(a, b) * v[b];
  }
  return out;
}

double edge_average(const WeightedChainModel& model, const std::vector<double>& pi) {
  double s = 0.0;
  for (std::size_t b = 0; b < pi.size(); ++b) {
    if (pi[b] == 0.0) continue;
    for (std::size_t a = 0; a < pi.size(); ++a)
      if (model.M(a, b) > 0.0) s += pi[b] * model.M(a, b) * std::log(model.W(a, b));
  }
  return s;
}

}  // namespace

std::vector<std::vector<double>> phase_distributions(const WeightedChainModel& model, const PeriodStructure& period) {
  const std::size_t n = model.base.size();
  const int p = period.period;
  const auto& a0 = period.classes[0];
  std::vector<double> v(n, 0.0);
  for (auto a : a0) v[a] = 1.0 / static_cast<double>(a0.size());
  // Lazy iteration v <- (v + M^p v)/2 converges for every irreducible block.
  double change = kInf;
  for (int it = 0; it < 1'000'000 && change > 1e-15; ++it) {
    auto w = v;
    for (int k = 0; k < p; ++k) w = apply_matrix(model.M, w);
    change = 0.0;
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double nv = 0.5 * (v[a] + w[a]);
      change += std::abs(nv - v[a]);
      v[a] = nv;
      total += nv;
    }
    for (auto& x : v) x /= total;
  }
  if (change > 1e-10) fail(ErrorCode::Numeric, "NoConvergence: stationary vector of M^p did not settle");
  std::vector<std::vector<double>> pis(static_cast<std::size_t>(p));
  pis[0] = v;
  if (p > 1) {
    pis[static_cast<std::size_t>(p - 1)] = apply_matrix(model.M, v);
    for (int k = p - 2; k >= 1; --k) pis[static_cast<std::size_t>(k)] = apply_matrix(model.M, pis[static_cast<std::size_t>(k + 1)]);
  }
  return pis;
}

namespace {

double lln_from_phases(const WeightedChainModel& model, const std::vector<std::vector<double>>& pis, int j) {
  const int p = static_cast<int>(pis.size());
  const double d = model.base.arity;
  double norm = 0.0;
  for (int l = 0; l < p; ++l) norm += std::pow(d, -l);
  double out = 0.0;
  for (int i = 0; i < p; ++i) {
    const int k = ((i + 1 - j) % p + p) % p;
    out += std::pow(d, -i) / norm * edge_average(model, pis[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace

double lln_limit(const WeightedChainModel& model, const PeriodStructure& period, int j) {
  return lln_from_phases(model, phase_distributions(model, period), period.wrap(j));
}

LlnSummary lln_summary(const WeightedChainModel& model, const PeriodStructure& period) {
  const auto pis = phase_distributions(model, period);
  const int p = period.period;
  LlnSummary s;
  for (int j = 0; j < p; ++j) s.phases.push_back(lln_from_phases(model, pis, j));
  s.alpha_minus = *std::min_element(s.phases.begin(), s.phases.end());
  s.alpha_plus = *std::max_element(s.phases.begin(), s.phases.end());
  s.stationary.assign(model.base.size(), 0.0);
  for (const auto& pi : pis)
    for (std::size_t a = 0; a < pi.size(); ++a) s.stationary[a] += pi[a] / p;
  std::vector<double> mass(static_cast<std::size_t>(p), 0.0);
  for (std::size_t a = 0; a < s.stationary.size(); ++a)
    if (period.class_of[a] >= 0) mass[static_cast<std::size_t>(period.class_of[a])] += s.stationary[a];
  s.beta_minus = kInf;
  s.beta_plus = kNegInf;
  for (int i = 0; i < p; ++i) {
    double beta = 0.0;
    for (int c = 0; c < p; ++c) beta += mass[static_cast<std::size_t>(c)] * s.phases[static_cast<std::size_t>((i + c) % p)];
    s.beta_minus = std::min(s.beta_minus, beta);
    s.beta_plus = std::max(s.beta_plus, beta);
  }
  return s;
}

RateCurve rate_curve(const WeightedChainModel& model, const PeriodStructure& period, int j, const GridSpec& grid,
                     const RateOptions& options) {
  if (grid.points < 2) fail(ErrorCode::Validation, "rate grid needs at least 2 points");
  RateCurve curve;
  curve.class_index = period.wrap(j);
  curve.endpoints = domain_endpoints(model, period, j, options);
  curve.alpha_star = lln_limit(model, period, j);
  const double lo = curve.endpoints.alpha1 - grid.margin, hi = curve.endpoints.alpha2 + grid.margin;
  curve.points.resize(static_cast<std::size_t>(grid.points));
  parallel_for(curve.points.size(), grid.threads, [&](std::size_t i) {
    const double alpha = lo + (hi - lo) * static_cast<double>(i) / (grid.points - 1);
    curve.points[i] = rate(model, period, j, alpha, options);
  });
  return curve;
}

}  // namespace treeshift
