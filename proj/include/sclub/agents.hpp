#pragma once

#include "sclub/envsim.hpp"
#include "sclub/numerics.hpp"
#include "sclub/usergraph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sclub {

enum class Variant {
  sclub_cd,       // RBF graph -> binarised top-n -> Louvain
  weight,         // Louvain on the dense weighted RBF graph
  weight_sparse,  // top-n sparsification keeping weights -> Louvain
  correct,        // ground-truth clusters, learned preferences
  linucb,         // independent per-user models
  club,           // edge deletion from the complete graph, connected components
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct PolicyConfig {
  std::string name;
  Variant variant = Variant::sclub_cd;
  double alpha = 1.0;
  int n = 10;
  int graph_period = 1;
  std::optional<double> fixed_sigma;  // unset: median pairwise distance per rebuild
  double club_alpha2 = 1.0;
  std::vector<int> labels;            // ground-truth clusters, required by `correct`
  std::optional<std::vector<int>> forced_partition;  // replaces clustering for the graph variants
};

/// Ridge statistics of one user: m = I + sum x x^T, b = sum a x, u_hat = m^-1 b.
struct UserEstimate {
  Mat m;
  Vec b;
  Vec u_hat;
  long served = 0;

  static UserEstimate cold(int dim);
};

struct ClusterAggregate {
  Mat m_bar;
  Vec b_bar;
  Vec u_bar;
  std::vector<int> members;
};

/// m_bar = I + sum (m_i - I), b_bar = sum b_i, u_bar = m_bar^-1 b_bar.
ClusterAggregate cluster_aggregate(const std::vector<UserEstimate>& estimates,
                                   const std::vector<int>& members);

/// alpha * sqrt(x^T m_bar^-1 x * ln(t + 1)).
double confidence_bound(const Mat& m_bar, const Vec& x, long t, double alpha);

/// CLUB per-user radius alpha2 * sqrt((1 + ln(1 + s)) / (1 + s)).
double club_radius(long served, double alpha2);

/// One bandit policy instance. Not thread-safe; each run owns its own agent.
class Agent {
 public:
  Agent(PolicyConfig config, int num_users, int dim, std::uint64_t seed);

  /// UCB argmax over the pool using the active user's cluster; ties go to the lowest item index.
  int select_arm(const Round& round, const RowMat& items) const;

  /// Folds (x, payoff) into the served user's statistics only.
  void update(int user, const Vec& x, double payoff);

  /// Recomputes the partition according to the variant.
  const Partition& recluster(long t);

  /// CLUB edge deletion followed by connected components.
  void club_maintain(long t);

  /// Post-update bookkeeping for round t: CLUB maintenance or periodic reclustering.
  /// Returns true when the partition was recomputed.
  bool end_round(long t);

  const PolicyConfig& config() const { return config_; }
  const Partition& partition() const { return partition_; }
  int num_clusters() const { return partition_.num_communities(); }
  /// Graph the current partition was derived from (absent for correct/linucb/forced).
  const std::optional<SimilarityGraph>& last_graph() const { return last_graph_; }
  const std::vector<UserEstimate>& estimates() const { return users_; }
  const UserEstimate& estimate(int user) const { return users_.at(static_cast<std::size_t>(user)); }
  RowMat estimate_matrix() const;
  int num_users() const { return static_cast<int>(users_.size()); }
  int dim() const { return dim_; }

 private:
  SimilarityGraph club_graph() const;

  PolicyConfig config_;
  int dim_;
  std::uint64_t seed_;
  std::vector<UserEstimate> users_;
  Partition partition_;
  std::optional<SimilarityGraph> last_graph_;
  Mat sq_dist_;  // squared distances between current estimates (graph variants only)
  std::vector<std::vector<char>> club_edges_;
  std::vector<int> club_dirty_;
};

}  // namespace sclub
