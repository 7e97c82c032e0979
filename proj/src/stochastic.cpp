#include "treeshift/stochastic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "treeshift/parallel.hpp"

namespace treeshift {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t node) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ node);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

struct Sampler {
  std::vector<std::vector<double>> cumulative;  // per parent column
  std::vector<std::vector<std::uint32_t>> symbols;

  explicit Sampler(const WeightedChainModel& model) {
    const std::size_t k = model.base.size();
    cumulative.resize(k);
    symbols.resize(k);
    for (std::size_t b = 0; b < k; ++b) {
      double c = 0.0;
      for (std::size_t a = 0; a < k; ++a)
        if (model.M(a, b) > 0.0) {
          c += model.M(a, b);
          cumulative[b].push_back(c);
          symbols[b].push_back(static_cast<std::uint32_t>(a));
        }
    }
  }

  std::uint32_t draw(std::size_t parent, double u) const {
    const auto& cum = cumulative[parent];
    const double scaled = u * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), scaled);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
    return symbols[parent][idx];
  }
};

std::uint32_t draw_root(const WeightedChainModel& model, const SampleConfig& config, std::uint64_t trial) {
  if (config.root) {
    if (*config.root >= model.base.size()) fail(ErrorCode::Validation, "root symbol out of range");
    return static_cast<std::uint32_t>(*config.root);
  }
  const auto& dist = config.root_distribution;
  if (dist.size() != model.base.size()) fail(ErrorCode::Validation, "root distribution has the wrong length");
  const double u = counter_uniform(config.seed, trial, 0) * std::accumulate(dist.begin(), dist.end(), 0.0);
  double c = 0.0;
  std::uint32_t last = 0;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    if (dist[a] <= 0.0) continue;
    c += dist[a];
    last = static_cast<std::uint32_t>(a);
    if (u < c) return last;
  }
  return last;
}

void check_config(const SampleConfig& config) {
  if (config.depth < 0) fail(ErrorCode::Validation, "depth must be >= 0");
  if (config.trials < 1) fail(ErrorCode::Validation, "trials must be >= 1");
}

// Fills one level of children from the parent level.
void next_level(const Sampler& sampler, const SampleConfig& config, std::uint64_t trial, int d,
                std::uint64_t parent_begin, const std::vector<std::uint32_t>& parents, std::vector<std::uint32_t>& out,
                int threads) {
  out.resize(parents.size() * static_cast<std::size_t>(d));
  const std::size_t chunk = 4096;
  const std::size_t chunks = (parents.size() + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(parents.size(), (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) {
      const std::uint64_t node = parent_begin + i;
      for (int k = 0; k < d; ++k) {
        const std::uint64_t child = static_cast<std::uint64_t>(d) * node + 1 + static_cast<std::uint64_t>(k);
        out[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
            sampler.draw(parents[i], counter_uniform(config.seed, trial, child));
      }
    }
  });
}

// Running sample means along depths 0..n for one trial, streaming levels.
std::vector<double> running_means(const WeightedChainModel& model, const Sampler& sampler, const WeightMatrix& log_w,
                                  const SampleConfig& config, std::uint64_t trial, int threads) {
  const int d = model.base.arity;
  std::vector<std::uint32_t> level{draw_root(model, config, trial)}, next;
  std::vector<double> out{0.0};
  double sum = 0.0;
  std::uint64_t begin = 0;
  for (int k = 0; k < config.depth; ++k) {
    if (level.size() * static_cast<std::size_t>(d) > config.limits.max_sample_nodes) {
      std::ostringstream os;
      os << "level " << k + 1 << " has more than " << config.limits.max_sample_nodes << " nodes";
      fail(ErrorCode::Resource, os.str());
    }
    next_level(sampler, config, trial, d, begin, level, next, threads);
    double level_sum = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) level_sum += log_w(next[i], level[i / static_cast<std::size_t>(d)]);
    sum += level_sum;
    begin += level.size();
    level.swap(next);
    out.push_back(sum / static_cast<double>(lattice_size(d, k + 1)));
  }
  return out;
}

WeightMatrix weight_logs(const WeightedChainModel& model) {
  return to_log_weights(model.W);
}

}  // namespace

LabeledTree sample_tree(const WeightedChainModel& model, const SampleConfig& config, std::uint64_t trial) {
  check_config(config);
  const auto shape = make_shape(model.base.arity, config.depth, config.limits);
  if (shape.nodes() > config.limits.max_sample_nodes) fail(ErrorCode::Resource, "tree exceeds the sample node cap");
  const Sampler sampler(model);
  LabeledTree t{shape, {}};
  t.labels.reserve(shape.nodes());
  std::vector<std::uint32_t> level{draw_root(model, config, trial)}, next;
  t.labels.push_back(level[0]);
  std::uint64_t begin = 0;
  for (int k = 0; k < config.depth; ++k) {
    next_level(sampler, config, trial, shape.arity, begin, level, next, config.threads);
    t.labels.insert(t.labels.end(), next.begin(), next.end());
    begin += level.size();
    level.swap(next);
  }
  return t;
}

ExperimentReport lln_experiment(const WeightedChainModel& model, const SampleConfig& config) {
  check_config(config);
  const Sampler sampler(model);
  const auto log_w = weight_logs(model);
  ExperimentReport rep;
  rep.running.resize(static_cast<std::size_t>(config.trials));
  // Trials run in parallel; each trial samples its levels sequentially.
  parallel_for(rep.running.size(), config.threads, [&](std::size_t t) {
    rep.running[t] = running_means(model, sampler, log_w, config, t, 1);
  });
  const auto n = static_cast<std::size_t>(config.depth);
  rep.mean_by_depth.assign(n + 1, 0.0);
  for (const auto& r : rep.running) {
    rep.trial_means.push_back(r[n]);
    for (std::size_t k = 0; k <= n; ++k) rep.mean_by_depth[k] += r[k] / config.trials;
  }
  rep.empirical_mean = rep.mean_by_depth[n];
  double var = 0.0;
  for (double m : rep.trial_means) var += (m - rep.empirical_mean) * (m - rep.empirical_mean);
  var = config.trials > 1 ? var / (config.trials - 1) : 0.0;
  rep.standard_error = std::sqrt(var / config.trials);

  const auto period = find_a0_and_period(model.base);
  rep.phase_targets = lln_summary(model, period).phases;
  rep.target = rep.phase_targets[static_cast<std::size_t>(config.depth % period.period)];
  const double diff = rep.empirical_mean - rep.target;
  rep.z_score = rep.standard_error > 0.0 ? diff / rep.standard_error : (std::abs(diff) < 1e-12 ? 0.0 : kInf);
  rep.pass = std::abs(rep.z_score) <= 3.0;
  return rep;
}

std::vector<TailPoint> tail_estimate(const WeightedChainModel& model, const SampleConfig& config, double lo,
                                     double hi) {
  check_config(config);
  const Sampler sampler(model);
  const auto log_w = weight_logs(model);
  std::vector<std::vector<double>> running(static_cast<std::size_t>(config.trials));
  parallel_for(running.size(), config.threads,
               [&](std::size_t t) { running[t] = running_means(model, sampler, log_w, config, t, 1); });
  std::vector<TailPoint> out;
  const double z = 1.959963984540054;
  const double trials = config.trials;
  for (int k = 0; k <= config.depth; ++k) {
    TailPoint pt;
    pt.depth = k;
    for (const auto& r : running)
      if (r[static_cast<std::size_t>(k)] >= lo && r[static_cast<std::size_t>(k)] <= hi) ++pt.hits;
    pt.frequency = static_cast<double>(pt.hits) / trials;
    pt.log_rate = pt.hits ? std::log(pt.frequency) / static_cast<double>(lattice_size(model.base.arity, k)) : kNegInf;
    const double denom = 1.0 + z * z / trials;
    const double centre = (pt.frequency + z * z / (2.0 * trials)) / denom;
    const double half = z * std::sqrt(pt.frequency * (1.0 - pt.frequency) / trials + z * z / (4.0 * trials * trials)) / denom;
    pt.wilson_low = std::max(0.0, centre - half);
    pt.wilson_high = std::min(1.0, centre + half);
    out.push_back(pt);
  }
  return out;
}

}  // namespace treeshift
