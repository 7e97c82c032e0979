#include "treeshift/transfer_op.hpp"

#include <algorithm>
#include <sstream>

#include "treeshift/tree_core.hpp"

namespace treeshift {

LogVector class_indicator(const PeriodStructure& period, int j) {
  LogVector x(period.class_of.size(), kNegInf);
  for (auto a : period.classes[static_cast<std::size_t>(period.wrap(j))]) x[a] = 0.0;
  return x;
}

LogVector psi(const WeightMatrix& log_w, double s, const LogVector& x) {
  const std::size_t n = log_w.size();
  LogVector out(n, kNegInf);
  for (std::size_t b = 0; b < n; ++b) {
    LogSumExp acc;
    for (std::size_t a = 0; a < n; ++a)
      if (x[a] != kNegInf && log_w(a, b) != kNegInf) acc.add(log_w(a, b) + x[a]);
    const double v = acc.value();
    out[b] = v == kNegInf ? kNegInf : s * v;
  }
  return out;
}

void check_exponents(const std::vector<double>& r, int d) {
  if (r.empty()) fail(ErrorCode::Validation, "BadExponent: empty exponent vector");
  double log_prod = 0.0;
  for (double v : r) {
    if (!(v > 0.0) || v > d * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "BadExponent: r entry " << v << " outside (0, " << d << "]";
      fail(ErrorCode::Validation, os.str());
    }
    log_prod += std::log(v);
  }
  if (std::abs(log_prod) > 1e-10) {
    std::ostringstream os;
    os << "BadExponent: product of r is exp(" << log_prod << "), expected 1";
    fail(ErrorCode::Validation, os.str());
  }
}

LogVector apply_L(const WeightMatrix& log_w, const std::vector<double>& r, const LogVector& x, int rotation) {
  const int p = static_cast<int>(r.size());
  LogVector y = x;
  for (int k = 0; k < p; ++k) y = psi(log_w, r[static_cast<std::size_t>(((rotation + k) % p + p) % p)], y);
  return y;
}

LogVector apply_L(const AdjacencyModel& model, const std::vector<double>& r, const LogVector& x, int rotation) {
  check_exponents(r, model.arity);
  if (x.size() != model.size()) fail(ErrorCode::Validation, "apply_L: vector length does not match the alphabet");
  return apply_L(to_log_weights(to_real(model.adjacency)), r, x, rotation);
}

namespace {

// Dependency digraph of L on class j: b -> a when a is a p-step descendant of b.
Digraph class_step_graph(const AdjacencyModel& model, const PeriodStructure& period, int j) {
  BoolMatrix power = model.adjacency;
  for (int k = 1; k < period.period; ++k) power = bool_multiply(power, model.adjacency);
  const auto mask = period.mask(j);
  Digraph g(model.size());
  for (std::size_t b = 0; b < model.size(); ++b) {
    if (!mask[b]) continue;
    for (std::size_t a = 0; a < model.size(); ++a)
      if (mask[a] && power(a, b)) g[b].push_back(a);
  }
  return g;
}

struct BlockResult {
  double log_rho = kNegInf;
  LogVector vec;
  int iterations = 0;
  double residual = 0.0;
};

// Power iteration of L^m restricted to one recurrent block of the class.
BlockResult block_power(const WeightMatrix& log_w, const std::vector<double>& r, int rotation,
                        const std::vector<std::size_t>& block, int m, const EigenOptions& opt) {
  const std::size_t n = log_w.size();
  std::vector<bool> inside(n, false);
  for (auto a : block) inside[a] = true;
  LogVector x(n, kNegInf);
  for (auto a : block) x[a] = 0.0;

  double lo = kNegInf, hi = kInf;
  for (int it = 1; it <= opt.max_iter; ++it) {
    LogVector y = x;
    for (int k = 0; k < m; ++k) {
      y = apply_L(log_w, r, y, rotation);
      for (std::size_t a = 0; a < n; ++a)
        if (!inside[a]) y[a] = kNegInf;
    }
    lo = kInf;
    hi = kNegInf;
    LogSumExp norm;
    for (auto a : block) {
      const double diff = y[a] - x[a];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
      norm.add(y[a]);
    }
    const double z = norm.value();
    for (auto a : block) x[a] = y[a] - z;
    if (hi - lo < opt.tolerance * m) {
      return {0.5 * (lo + hi) / m, x, it, (hi - lo) / m};
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << "NoConvergence: eigenvalue bracket [" << lo / m << ", " << hi / m << "] after " << opt.max_iter
     << " iterations";
  fail(ErrorCode::Numeric, os.str());
}

}  // namespace

EigenPair principal_eigenpair(const AdjacencyModel& model, const PeriodStructure& period,
                              const std::vector<double>& r, int j, const EigenOptions& options) {
  if (static_cast<int>(r.size()) != period.period) fail(ErrorCode::Validation, "BadExponent: length of r differs from p");
  check_exponents(r, model.arity);
  const WeightMatrix log_w = to_log_weights(model.adjacency);
  const int jj = period.wrap(j);
  const int rotation = options.literal ? 0 : jj;

  const Digraph g = class_step_graph(model, period, jj);
  const auto& cls = period.classes[static_cast<std::size_t>(jj)];
  std::vector<std::vector<std::size_t>> blocks;
  for (auto& comp : strongly_connected_components(g)) {
    if (has_cycle(g, comp)) blocks.push_back(std::move(comp));
  }
  if (blocks.empty()) fail(ErrorCode::Validation, "class has no recurrent symbols");

  EigenPair best;
  best.class_index = jj;
  best.eigvec_unique = false;
  bool first = true;
  for (const auto& block : blocks) {
    const int m = std::max(1, component_period(g, block));
    auto res = block_power(log_w, r, rotation, block, m, options);
    best.iterations += res.iterations;
    if (first || res.log_rho > best.log_rho) {
      best.log_rho = res.log_rho;
      best.eigvec = std::move(res.vec);
      best.residual = res.residual;
      first = false;
    }
    if (blocks.size() == 1 && m == 1 && block.size() == cls.size()) best.eigvec_unique = true;
  }
  return best;
}

EntropyResult entropy_iterate(const AdjacencyModel& model, int n_max) {
  if (n_max < 0) fail(ErrorCode::Validation, "entropy_iterate: n_max must be >= 0");
  const WeightMatrix log_a = to_log_weights(model.adjacency);
  EntropyResult out;
  LogVector c(model.size(), 0.0);
  for (int k = 0; k <= n_max; ++k) {
    if (k > 0) c = psi(log_a, model.arity, c);
    out.sequence.push_back({k, log_sum_exp(c) / lattice_size_real(model.arity, k)});
  }
  out.last_log_counts = c;

  int stride = 1;
  try {
    stride = find_a0_and_period(model).period;
  } catch (const Error&) {
  }
  const double last = out.sequence.back().value;
  out.h_top = last;
  if (n_max >= 2 * stride) {
    const double x0 = out.sequence[static_cast<std::size_t>(n_max - 2 * stride)].value;
    const double x1 = out.sequence[static_cast<std::size_t>(n_max - stride)].value;
    const double denom = (last - x1) - (x1 - x0);
    if (std::abs(denom) > 1e-14 * std::max(1.0, std::abs(last))) {
      const double aitken = last - (last - x1) * (last - x1) / denom;
      if (std::isfinite(aitken) && std::abs(aitken - last) <= std::abs(last - x1) * 10.0) out.h_top = aitken;
    }
  }
  return out;
}

}  // namespace treeshift
