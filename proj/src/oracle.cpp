#include "treeshift/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace treeshift {

std::vector<BigInt> recursion_counts(const AdjacencyModel& model, int n) {
  const std::size_t k = model.size();
  std::vector<BigInt> c(k, 1);
  for (int level = 0; level < n; ++level) {
    std::vector<BigInt> next(k);
    for (std::size_t a = 0; a < k; ++a) {
      BigInt s = 0;
      for (std::size_t b = 0; b < k; ++b)
        if (model.allows(b, a)) s += c[b];
      next[a] = boost::multiprecision::pow(s, static_cast<unsigned>(model.arity));
    }
    c.swap(next);
  }
  return c;
}

BlockEnumeration enumerate_blocks(const AdjacencyModel& model, int n, std::optional<std::size_t> root, bool list,
                                  const Limits& limits) {
  const auto predicted = recursion_counts(model, n);
  BigInt total = 0;
  for (std::size_t a = 0; a < model.size(); ++a)
    if (!root || *root == a) total += predicted[a];
  if (total > limits.max_block_listing) {
    std::ostringstream os;
    os << "TooLarge: " << total << " blocks exceed the enumeration limit " << limits.max_block_listing;
    fail(ErrorCode::Resource, os.str());
  }

  BlockEnumeration out;
  out.counts.assign(model.size(), 0);
  const TreeShape shape{model.arity, n};
  const std::uint64_t nodes = shape.nodes();
  std::vector<std::uint32_t> labels(nodes, 0);
  std::vector<std::vector<std::uint32_t>> children(model.size());
  for (std::size_t b = 0; b < model.size(); ++b)
    for (std::size_t a = 0; a < model.size(); ++a)
      if (model.allows(a, b)) children[b].push_back(static_cast<std::uint32_t>(a));

  std::uint64_t found = 0;
  std::function<void(std::uint64_t)> fill = [&](std::uint64_t i) {
    if (i == nodes) {
      ++found;
      if (list) out.trees.push_back({shape, labels});
      return;
    }
    for (auto a : children[labels[shape.parent(i)]]) {
      labels[i] = a;
      fill(i + 1);
    }
  };
  for (std::size_t a = 0; a < model.size(); ++a) {
    if (root && *root != a) continue;
    labels[0] = static_cast<std::uint32_t>(a);
    found = 0;
    fill(1);
    out.counts[a] = found;
  }
  return out;
}

EmpiricalPair TypeClass::empirical(const AdjacencyModel& model) const {
  EmpiricalPair out;
  const std::size_t k = model.size();
  for (const auto& level : level_counts) {
    double total = 0.0;
    for (auto v : level) total += static_cast<double>(v);
    std::vector<double> dist(k);
    for (std::size_t a = 0; a < k; ++a) dist[a] = static_cast<double>(level[a]) / total;
    out.dists.push_back(std::move(dist));
  }
  for (std::size_t i = 0; i < edge_counts.size(); ++i) {
    RealMatrix eta(k, 0.0);
    for (std::size_t b = 0; b < k; ++b) {
      const double parents = static_cast<double>(level_counts[i][b]) * model.arity;
      double col = 0.0;
      for (std::size_t a = 0; a < k; ++a) col += model.adjacency(a, b);
      for (std::size_t a = 0; a < k; ++a)
        eta(a, b) = parents > 0.0 ? static_cast<double>(edge_counts[i](a, b)) / parents
                                  : (col > 0.0 ? model.adjacency(a, b) / col : 0.0);
    }
    out.trans.push_back(std::move(eta));
  }
  return out;
}

double TypeClass::mean(const WeightMatrix& log_w, int d) const {
  double s = 0.0;
  for (const auto& k : edge_counts)
    for (std::size_t a = 0; a < k.size(); ++a)
      for (std::size_t b = 0; b < k.size(); ++b)
        if (k(a, b)) s += static_cast<double>(k(a, b)) * log_w(a, b);
  return s / static_cast<double>(lattice_size(d, static_cast<int>(edge_counts.size())));
}

namespace {

// Every way to split `total` slots among the allowed children.
void split(const std::vector<std::size_t>& allowed, std::size_t idx, std::uint64_t total,
           std::vector<std::uint64_t>& cur, std::vector<std::vector<std::uint64_t>>& out) {
  if (idx + 1 == allowed.size()) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::uint64_t k = 0; k <= total; ++k) {
    cur.push_back(k);
    split(allowed, idx + 1, total - k, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<std::size_t>> allowed_children(const AdjacencyModel& model) {
  std::vector<std::vector<std::size_t>> out(model.size());
  for (std::size_t b = 0; b < model.size(); ++b)
    for (std::size_t a = 0; a < model.size(); ++a)
      if (model.allows(a, b)) out[b].push_back(a);
  return out;
}

BigInt multinomial(std::uint64_t total, const std::vector<std::uint64_t>& parts) {
  BigInt out = 1;
  std::uint64_t left = total;
  for (auto k : parts) {
    // binomial(left, k)
    BigInt c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
      c *= left - k + i;
      c /= i;
    }
    out *= c;
    left -= k;
  }
  return out;
}

double log_multinomial(std::uint64_t total, const std::vector<std::uint64_t>& parts) {
  double v = std::lgamma(static_cast<double>(total) + 1.0);
  for (auto k : parts) v -= std::lgamma(static_cast<double>(k) + 1.0);
  return v;
}

}  // namespace

std::vector<TypeClass> enumerate_type_classes(const AdjacencyModel& model, const RealMatrix& M, int n,
                                              std::size_t root, const Limits& limits) {
  const std::size_t k = model.size();
  const auto allowed = allowed_children(model);
  const bool have_m = M.size() == k;
  std::vector<TypeClass> out;

  TypeClass start;
  start.level_counts.push_back(std::vector<std::uint64_t>(k, 0));
  start.level_counts[0][root] = 1;
  start.count = 1;
  start.log_prob = 0.0;

  std::function<void(TypeClass&)> level = [&](TypeClass& cls) {
    const int i = static_cast<int>(cls.edge_counts.size());
    if (i == n) {
      if (out.size() >= limits.max_type_classes) {
        std::ostringstream os;
        os << "TooLarge: more than " << limits.max_type_classes << " type classes";
        fail(ErrorCode::Resource, os.str());
      }
      TypeClass done = cls;
      if (have_m) {
        double lp = std::log(done.count.convert_to<double>());
        for (const auto& e : done.edge_counts)
          for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
              if (e(a, b)) lp += static_cast<double>(e(a, b)) * std::log(M(a, b));
        done.log_prob = lp;
      } else {
        done.log_prob = kNegInf;
      }
      out.push_back(std::move(done));
      return;
    }
    const auto parents = cls.level_counts.back();
    CountMatrix edges(k, 0);
    std::function<void(std::size_t, BigInt)> per_parent = [&](std::size_t b, BigInt count) {
      while (b < k && parents[b] == 0) ++b;
      if (b == k) {
        std::vector<std::uint64_t> next(k, 0);
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t c = 0; c < k; ++c) next[a] += edges(a, c);
        TypeClass child = cls;
        child.edge_counts.push_back(edges);
        child.level_counts.push_back(next);
        child.count = cls.count * count;
        level(child);
        return;
      }
      const std::uint64_t slots = parents[b] * static_cast<std::uint64_t>(model.arity);
      std::vector<std::vector<std::uint64_t>> splits;
      std::vector<std::uint64_t> cur;
      split(allowed[b], 0, slots, cur, splits);
      for (const auto& s : splits) {
        for (std::size_t t = 0; t < s.size(); ++t) edges(allowed[b][t], b) = s[t];
        per_parent(b + 1, count * multinomial(slots, s));
      }
      for (auto a : allowed[b]) edges(a, b) = 0;
    };
    per_parent(0, 1);
  };
  level(start);
  return out;
}

std::vector<MeanAtom> exact_mean_distribution(const WeightedChainModel& model, int n, std::size_t root,
                                              const Limits& limits) {
  const auto& base = model.base;
  const std::size_t k = base.size();
  const auto allowed = allowed_children(base);
  // Edges are grouped by their weight value; weight 1 contributes nothing and
  // is left out of the key.
  std::vector<double> weight_values;
  CountMatrix edge_id(k, 0);
  std::vector<std::vector<bool>> tracked(k, std::vector<bool>(k, false));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      if (!base.allows(a, b) || model.W(a, b) == 1.0) continue;
      auto it = std::find(weight_values.begin(), weight_values.end(), model.W(a, b));
      edge_id(a, b) = static_cast<std::uint64_t>(it - weight_values.begin());
      if (it == weight_values.end()) weight_values.push_back(model.W(a, b));
      tracked[a][b] = true;
    }

  // Key: level counts followed by cumulative edge-type counts.
  using Key = std::vector<std::uint64_t>;
  std::map<Key, double> states;
  Key start(k + weight_values.size(), 0);
  start[root] = 1;
  states[start] = 0.0;

  std::map<std::pair<std::size_t, std::uint64_t>, std::vector<std::pair<std::vector<std::uint64_t>, double>>> cache;
  auto splits_for = [&](std::size_t b, std::uint64_t parents) -> const auto& {
    auto it = cache.find({b, parents});
    if (it != cache.end()) return it->second;
    const std::uint64_t slots = parents * static_cast<std::uint64_t>(base.arity);
    std::vector<std::vector<std::uint64_t>> raw;
    std::vector<std::uint64_t> cur;
    split(allowed[b], 0, slots, cur, raw);
    std::vector<std::pair<std::vector<std::uint64_t>, double>> weighted;
    for (auto& s : raw) {
      double lp = log_multinomial(slots, s);
      for (std::size_t t = 0; t < s.size(); ++t)
        if (s[t]) lp += static_cast<double>(s[t]) * std::log(model.M(allowed[b][t], b));
      weighted.emplace_back(std::move(s), lp);
    }
    return cache.emplace(std::make_pair(b, parents), std::move(weighted)).first->second;
  };

  for (int level = 0; level < n; ++level) {
    std::map<Key, double> next;
    for (const auto& [key, lp] : states) {
      std::function<void(std::size_t, Key&, double)> per_parent = [&](std::size_t b, Key& acc, double p) {
        while (b < k && key[b] == 0) ++b;
        if (b == k) {
          auto& slot = next.try_emplace(acc, kNegInf).first->second;
          slot = log_add(slot, p);
          if (next.size() > limits.max_type_classes) fail(ErrorCode::Resource, "TooLarge: too many mean-distribution states");
          return;
        }
        for (const auto& [s, sp] : splits_for(b, key[b])) {
          for (std::size_t t = 0; t < s.size(); ++t) {
            acc[allowed[b][t]] += s[t];
            if (tracked[allowed[b][t]][b]) acc[k + edge_id(allowed[b][t], b)] += s[t];
          }
          per_parent(b + 1, acc, p + sp);
          for (std::size_t t = 0; t < s.size(); ++t) {
            acc[allowed[b][t]] -= s[t];
            if (tracked[allowed[b][t]][b]) acc[k + edge_id(allowed[b][t], b)] -= s[t];
          }
        }
      };
      Key acc(key);
      std::fill(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(k), 0);
      per_parent(0, acc, lp);
    }
    states.swap(next);
  }

  std::map<std::vector<std::uint64_t>, double> grouped;
  for (const auto& [key, lp] : states) {
    std::vector<std::uint64_t> edges(key.begin() + static_cast<std::ptrdiff_t>(k), key.end());
    auto& slot = grouped.try_emplace(edges, kNegInf).first->second;
    slot = log_add(slot, lp);
  }
  const double total = static_cast<double>(lattice_size(base.arity, n));
  std::vector<MeanAtom> atoms;
  for (const auto& [edges, lp] : grouped) {
    MeanAtom atom{edges, 0.0, lp};
    double s = 0.0;
    for (std::size_t e = 0; e < weight_values.size(); ++e)
      if (edges[e]) s += static_cast<double>(edges[e]) * std::log(weight_values[e]);
    atom.mean = s / total;
    atoms.push_back(std::move(atom));
  }
  std::stable_sort(atoms.begin(), atoms.end(), [](const MeanAtom& a, const MeanAtom& b) { return a.mean < b.mean; });
  return atoms;
}

double log_probability_in(const std::vector<MeanAtom>& atoms, double lo, double hi) {
  double out = kNegInf;
  for (const auto& a : atoms)
    if (a.mean >= lo && a.mean <= hi) out = log_add(out, a.log_prob);
  return out;
}

FiniteRate finite_rate(const WeightedChainModel& model, const PeriodStructure& period, int j, int n, double alpha) {
  const std::size_t k = model.base.size();
  const double d = model.base.arity;
  const double total = lattice_size_real(model.base.arity, n);
  const auto& root_class = period.classes[static_cast<std::size_t>(period.wrap(j - n))];

  struct Eval {
    double g, slope;
  };
  auto eval = [&](double mu) {
    const WeightMatrix log_e = tilted_matrix(model, mu);
    std::vector<double> y(k, 0.0), dy(k, 0.0), ny(k), ndy(k);
    for (int i = 0; i < n; ++i) {
      for (std::size_t b = 0; b < k; ++b) {
        double top = kNegInf;
        for (std::size_t a = 0; a < k; ++a)
          if (log_e(a, b) != kNegInf) top = std::max(top, log_e(a, b) + y[a]);
        double sum = 0.0, dsum = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
          if (log_e(a, b) == kNegInf) continue;
          const double w = std::exp(log_e(a, b) + y[a] - top);
          sum += w;
          dsum += w * (std::log(model.W(a, b)) + dy[a]);
        }
        ny[b] = d * (top + std::log(sum));
        ndy[b] = d * dsum / sum;
      }
      y.swap(ny);
      dy.swap(ndy);
    }
    std::size_t best = root_class.front();
    for (auto a : root_class)
      if (y[a] > y[best]) best = a;
    return Eval{-mu * alpha + y[best] / total, -alpha + dy[best] / total};
  };

  FiniteRate out;
  const auto e0 = eval(0.0);
  out.value = e0.g;
  if (e0.slope == 0.0) return out;
  const double dir = e0.slope < 0.0 ? 1.0 : -1.0;
  double inner = 0.0, best = e0.g;
  for (int k2 = 0; k2 <= 40; ++k2) {
    const double mu = dir * std::ldexp(1.0, k2);
    const auto e = eval(mu);
    if (e.slope * dir >= 0.0) {
      double lo = std::min(inner, mu), hi = std::max(inner, mu);
      for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval(mid).slope < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      const double mid = 0.5 * (lo + hi);
      const double g = eval(mid).g;
      out.value = std::min({g, e.g, best});
      out.argmin_mu = g <= std::min(e.g, best) ? mid : (e.g < best ? mu : inner);
      return out;
    }
    // Vanishing gains: the infimum is approached only as |mu| grows; stop
    // before cancellation in -mu*alpha + y/|Lambda| dominates.
    if (best - e.g <= 1e-15 * std::max(1.0, std::abs(e.g))) {
      out.value = std::min(best, e.g);
      out.argmin_mu = mu;
      return out;
    }
    best = e.g;
    inner = mu;
  }
  out.value = kNegInf;
  out.argmin_mu = dir * std::ldexp(1.0, 40);
  return out;
}

}  // namespace treeshift
