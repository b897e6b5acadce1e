#include "sclub/bench.hpp"

#include "sclub/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace sclub {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kAgentSeedSalt = 0xA5A5F00DBEEFCAFEULL;

Curve pointwise(const std::vector<const std::vector<double>*>& series) {
  Curve c;
  if (series.empty()) return c;
  const std::size_t len = series.front()->size();
  const auto n = static_cast<double>(series.size());
  c.mean.assign(len, 0.0);
  c.std.assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (const auto* s : series) sum += (*s)[t];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto* s : series) sq += ((*s)[t] - mean) * ((*s)[t] - mean);
    c.mean[t] = mean;
    c.std[t] = series.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  }
  return c;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::unique_ptr<BanditEnvironment> make_environment(const WorldSpec& spec, std::uint64_t seed) {
  if (spec.kind == WorldSpec::Kind::synthetic) {
    return std::make_unique<SyntheticWorld>(SyntheticWorld::generate(spec.synthetic, seed));
  }
  const FeatureArchive archive = read_archive(spec.archive);
  return std::make_unique<LoggedWorld>(make_logged_world(archive, spec.synthetic.pool, seed));
}

RunResult run_experiment(BanditEnvironment& env, const PolicyConfig& policy_in, long horizon, std::uint64_t seed,
                         const RecordOptions& record) {
  if (horizon < 1) throw std::invalid_argument("run_experiment: horizon must be >= 1");
  const auto truth = env.ground_truth();
  PolicyConfig policy = policy_in;
  if (policy.variant == Variant::correct && policy.labels.empty()) {
    if (!truth) throw std::invalid_argument("run_experiment: policy '" + policy.name + "' needs ground-truth clusters, which this world lacks");
    policy.labels = *truth;
  }
  Agent agent(policy, env.num_users(), env.dim(), seed ^ kAgentSeedSalt);
  const std::optional<Partition> truth_partition =
      truth ? std::optional<Partition>(Partition::from_labels(*truth)) : std::nullopt;

  RunResult res;
  res.policy = policy.name;
  res.seed = seed;
  const auto len = static_cast<std::size_t>(horizon);
  res.regret.reserve(len);
  res.cumulative.reserve(len);
  res.clusters.reserve(len);
  if (record.nmi) res.nmi.reserve(len);
  if (record.modularity) res.modularity.reserve(len);

  double nmi_now = kNaN;
  double modularity_now = kNaN;
  auto refresh = [&] {
    if (record.nmi) nmi_now = truth_partition ? nmi(agent.partition(), *truth_partition) : kNaN;
    if (record.modularity) {
      const auto& g = agent.last_graph();
      modularity_now = (g && g->has_edges()) ? modularity(*g, agent.partition()) : kNaN;
    }
  };
  refresh();

  const RowMat& items = env.items();
  double total = 0.0;
  auto block_start = std::chrono::steady_clock::now();
  for (long t = 1; t <= horizon; ++t) {
    const Round round = env.next_round(t);
    const int chosen = agent.select_arm(round, items);
    const double r = env.regret(round, chosen);
    const double payoff = env.payoff(round, chosen);
    agent.update(round.user, items.row(chosen).transpose(), payoff);
    if (agent.end_round(t)) refresh();

    total += r;
    res.regret.push_back(r);
    res.cumulative.push_back(total);
    res.clusters.push_back(agent.num_clusters());
    if (record.nmi) res.nmi.push_back(nmi_now);
    if (record.modularity) res.modularity.push_back(modularity_now);
    if (t % 1000 == 0 || t == horizon) {
      const auto now = std::chrono::steady_clock::now();
      res.seconds_per_1000.push_back(std::chrono::duration<double>(now - block_start).count());
      block_start = now;
    }
  }
  return res;
}

RunResult run_experiment(const ExperimentConfig& config, const PolicyConfig& policy, std::uint64_t seed) {
  if (config.world.kind == WorldSpec::Kind::logged && policy.variant == Variant::correct) {
    throw std::invalid_argument("run_experiment: policy '" + policy.name + "' (correct) cannot run on a logged world");
  }
  auto env = make_environment(config.world, seed);
  return run_experiment(*env, policy, config.horizon, seed, config.record);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<RunResult> run_all(const ExperimentConfig& config, int threads) {
  config.validate();
  for (const auto& p : config.policies) {
    if (config.world.kind == WorldSpec::Kind::logged && p.variant == Variant::correct) {
      throw std::invalid_argument("run_all: policy '" + p.name + "' (correct) cannot run on a logged world");
    }
  }
  const std::size_t n_seeds = config.seeds.size();
  std::vector<RunResult> results(config.policies.size() * n_seeds);
  parallel_for(results.size(), threads, [&](std::size_t i) {
    results[i] = run_experiment(config, config.policies[i / n_seeds], config.seeds[i % n_seeds]);
  });
  return results;
}

Aggregate aggregate_runs(const std::vector<RunResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate_runs: no results");
  const std::size_t len = results.front().regret.size();
  std::vector<const std::vector<double>*> cum;
  std::vector<const std::vector<double>*> nmis;
  std::vector<const std::vector<double>*> mods;
  std::vector<std::vector<double>> clusters;
  clusters.reserve(results.size());
  for (const auto& r : results) {
    if (r.regret.size() != len || r.cumulative.size() != len || r.clusters.size() != len) {
      throw std::invalid_argument("aggregate_runs: runs have different lengths");
    }
    cum.push_back(&r.cumulative);
    clusters.emplace_back(r.clusters.begin(), r.clusters.end());
    if (r.nmi.size() == len) nmis.push_back(&r.nmi);
    if (r.modularity.size() == len) mods.push_back(&r.modularity);
  }
  std::vector<const std::vector<double>*> cl;
  for (const auto& c : clusters) cl.push_back(&c);

  Aggregate a;
  a.policy = results.front().policy;
  a.runs = results.size();
  a.cumulative = pointwise(cum);
  a.clusters = pointwise(cl);
  if (nmis.size() == results.size()) a.nmi = pointwise(nmis);
  if (mods.size() == results.size()) a.modularity = pointwise(mods);
  return a;
}

std::vector<Aggregate> aggregate_by_policy(const std::vector<RunResult>& results) {
  std::vector<std::string> order;
  for (const auto& r : results) {
    if (std::find(order.begin(), order.end(), r.policy) == order.end()) order.push_back(r.policy);
  }
  std::vector<Aggregate> out;
  for (const auto& name : order) {
    std::vector<RunResult> group;
    for (const auto& r : results) {
      if (r.policy == name) group.push_back(r);
    }
    out.push_back(aggregate_runs(group));
  }
  return out;
}

std::vector<SweepRow> sparsity_sweep(const ExperimentConfig& config, const std::vector<int>& n_values, int threads) {
  if (config.world.kind != WorldSpec::Kind::synthetic) {
    throw std::invalid_argument("sparsity_sweep: needs a synthetic world (ground truth for NMI)");
  }
  if (n_values.empty()) throw std::invalid_argument("sparsity_sweep: no n values");
  const PolicyConfig* base = nullptr;
  for (const auto& p : config.policies) {
    if (p.name == config.sweep.policy || (config.sweep.policy.empty() && p.variant == Variant::sclub_cd)) {
      base = &p;
      break;
    }
  }
  if (base == nullptr) throw std::invalid_argument("sparsity_sweep: no policy named '" + config.sweep.policy + "'");

  ExperimentConfig cfg = config;
  cfg.record.nmi = true;
  cfg.record.modularity = true;
  cfg.policies.clear();
  for (int n : n_values) {
    PolicyConfig p = *base;
    p.n = n;
    p.name = base->name + "@n=" + std::to_string(n);
    cfg.policies.push_back(std::move(p));
  }
  const auto results = run_all(cfg, threads);
  const auto aggregates = aggregate_by_policy(results);

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const auto& a = aggregates[i];
    SweepRow row;
    row.n = n_values[i];
    row.final_regret = a.cumulative.mean.back();
    row.final_regret_std = a.cumulative.std.back();
    row.final_nmi = a.nmi.mean.back();
    row.final_modularity = a.modularity.mean.back();
    row.final_clusters = a.clusters.mean.back();
    rows.push_back(row);
  }
  return rows;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples of size >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace sclub
