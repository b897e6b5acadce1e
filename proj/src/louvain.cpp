// Two-phase Louvain modularity optimisation (local moves, then aggregation).

#include "sclub/usergraph.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace sclub {

namespace {

constexpr double kLevelTolerance = 1e-9;
constexpr int kMaxPasses = 1000;

struct LevelGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;  // off-diagonal only
  std::vector<double> self_loop;
  std::vector<double> degree;
  double two_m = 0.0;
};

LevelGraph from_dense(const SimilarityGraph& g) {
  LevelGraph lg;
  lg.n = g.size();
  lg.adj.resize(static_cast<std::size_t>(lg.n));
  lg.self_loop.assign(static_cast<std::size_t>(lg.n), 0.0);
  lg.degree.assign(static_cast<std::size_t>(lg.n), 0.0);
  for (int i = 0; i < lg.n; ++i) {
    for (int j = 0; j < lg.n; ++j) {
      const double w = g.weights(i, j);
      if (w == 0.0) continue;
      if (i == j) {
        lg.self_loop[static_cast<std::size_t>(i)] = w;
      } else {
        lg.adj[static_cast<std::size_t>(i)].emplace_back(j, w);
      }
      lg.degree[static_cast<std::size_t>(i)] += w;
    }
  }
  lg.two_m = std::accumulate(lg.degree.begin(), lg.degree.end(), 0.0);
  return lg;
}

// Collapses each community of `comm` (ids 0..k-1) into a single node.
LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& comm, int k) {
  LevelGraph out;
  out.n = k;
  out.adj.resize(static_cast<std::size_t>(k));
  out.self_loop.assign(static_cast<std::size_t>(k), 0.0);
  out.degree.assign(static_cast<std::size_t>(k), 0.0);
  out.two_m = g.two_m;
  std::vector<double> row(static_cast<std::size_t>(k), 0.0);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (int i = 0; i < g.n; ++i) groups[static_cast<std::size_t>(comm[static_cast<std::size_t>(i)])].push_back(i);
  for (int c = 0; c < k; ++c) {
    std::fill(row.begin(), row.end(), 0.0);
    double self = 0.0;
    for (int i : groups[static_cast<std::size_t>(c)]) {
      self += g.self_loop[static_cast<std::size_t>(i)];
      for (const auto& [j, w] : g.adj[static_cast<std::size_t>(i)]) {
        row[static_cast<std::size_t>(comm[static_cast<std::size_t>(j)])] += w;
      }
    }
    self += row[static_cast<std::size_t>(c)];
    out.self_loop[static_cast<std::size_t>(c)] = self;
    out.degree[static_cast<std::size_t>(c)] = self;
    for (int d = 0; d < k; ++d) {
      if (d == c || row[static_cast<std::size_t>(d)] == 0.0) continue;
      out.adj[static_cast<std::size_t>(c)].emplace_back(d, row[static_cast<std::size_t>(d)]);
      out.degree[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(d)];
    }
  }
  return out;
}

class LocalMover {
 public:
  explicit LocalMover(const LevelGraph& g)
      : g_(g),
        comm_(static_cast<std::size_t>(g.n)),
        internal_(g.self_loop),
        total_(g.degree),
        link_(static_cast<std::size_t>(g.n), 0.0) {
    std::iota(comm_.begin(), comm_.end(), 0);
  }

  double quality() const {
    double q = 0.0;
    for (int c = 0; c < g_.n; ++c) {
      const double share = total_[static_cast<std::size_t>(c)] / g_.two_m;
      q += internal_[static_cast<std::size_t>(c)] / g_.two_m - share * share;
    }
    return q;
  }

  // Sweeps nodes in `order` until a full pass makes no move. Returns the number of moves.
  int run(const std::vector<int>& order, LouvainTrace* trace) {
    int moves = 0;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      int moved = 0;
      for (int node : order) {
        if (move_node(node)) {
          ++moved;
          if (trace != nullptr) trace->modularity_after_move.push_back(quality());
        }
      }
      moves += moved;
      if (moved == 0) break;
    }
    return moves;
  }

  // Relabels communities to 0..k-1 by first appearance; returns k.
  int compact() {
    std::vector<int> remap(static_cast<std::size_t>(g_.n), -1);
    int k = 0;
    for (auto& c : comm_) {
      auto& r = remap[static_cast<std::size_t>(c)];
      if (r < 0) r = k++;
      c = r;
    }
    return k;
  }

  const std::vector<int>& communities() const { return comm_; }

 private:
  bool move_node(int node) {
    const auto i = static_cast<std::size_t>(node);
    const int old = comm_[i];
    const double k_i = g_.degree[i];

    touched_.clear();
    for (const auto& [j, w] : g_.adj[i]) {
      const int c = comm_[static_cast<std::size_t>(j)];
      if (link_[static_cast<std::size_t>(c)] == 0.0) touched_.push_back(c);
      link_[static_cast<std::size_t>(c)] += w;
    }

    total_[static_cast<std::size_t>(old)] -= k_i;
    internal_[static_cast<std::size_t>(old)] -= 2.0 * link_[static_cast<std::size_t>(old)] + g_.self_loop[i];

    auto gain = [&](int c) {
      return link_[static_cast<std::size_t>(c)] - total_[static_cast<std::size_t>(c)] * k_i / g_.two_m;
    };
    // Strict improvement over staying put; equal gains resolve to the lowest community id.
    const double eps = 1e-12 * (1.0 + k_i);
    int best = old;
    double best_gain = gain(old);
    std::sort(touched_.begin(), touched_.end());
    for (int c : touched_) {
      if (c == old) continue;
      const double gc = gain(c);
      if (gc > best_gain + eps) {
        best = c;
        best_gain = gc;
      }
    }

    total_[static_cast<std::size_t>(best)] += k_i;
    internal_[static_cast<std::size_t>(best)] += 2.0 * link_[static_cast<std::size_t>(best)] + g_.self_loop[i];
    comm_[i] = best;

    for (int c : touched_) link_[static_cast<std::size_t>(c)] = 0.0;
    return best != old;
  }

  const LevelGraph& g_;
  std::vector<int> comm_;
  std::vector<double> internal_;
  std::vector<double> total_;
  std::vector<double> link_;
  std::vector<int> touched_;
};

}  // namespace

Partition louvain(const SimilarityGraph& g, std::uint64_t seed, LouvainTrace* trace) {
  const int n = g.size();
  if (!g.has_edges()) return Partition::singletons(n);

  std::mt19937_64 rng(seed);
  std::vector<int> node_comm(static_cast<std::size_t>(n));
  std::iota(node_comm.begin(), node_comm.end(), 0);

  LevelGraph level = from_dense(g);
  while (true) {
    LocalMover mover(level);
    const double before = mover.quality();
    std::vector<int> order(static_cast<std::size_t>(level.n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const int moves = mover.run(order, trace);
    if (trace != nullptr) ++trace->levels;
    const double after = mover.quality();
    const int k = mover.compact();
    for (auto& c : node_comm) c = mover.communities()[static_cast<std::size_t>(c)];

    if (moves == 0 || after - before < kLevelTolerance || k == level.n) break;
    level = aggregate(level, mover.communities(), k);
  }
  return Partition::from_labels(node_comm);
}

}  // namespace sclub
