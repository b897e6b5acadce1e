#include "sclub/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sclub {

namespace {

struct VariantName {
  Variant v;
  std::string_view name;
};

constexpr VariantName kVariantNames[] = {
    {Variant::sclub_cd, "sclub_cd"}, {Variant::weight, "weight"}, {Variant::weight_sparse, "weight_sparse"},
    {Variant::correct, "correct"},   {Variant::linucb, "linucb"}, {Variant::club, "club"},
};

// Shared by confidence_bound and select_arm so both produce identical bits.
double bound_from_factor(const Eigen::LLT<Mat>& llt, const Vec& x, long t, double alpha) {
  const Vec y = llt.matrixL().solve(x);
  return alpha * std::sqrt(y.squaredNorm() * std::log(static_cast<double>(t) + 1.0));
}

Eigen::LLT<Mat> factor_spd(const Mat& m, const char* what) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite");
  return llt;
}

bool uses_graph(Variant v) {
  return v == Variant::sclub_cd || v == Variant::weight || v == Variant::weight_sparse;
}

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& e : kVariantNames) {
    if (e.v == v) return e.name;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& e : kVariantNames) {
    if (e.name == name) return e.v;
  }
  throw std::invalid_argument("unknown policy variant '" + std::string(name) + "'");
}

UserEstimate UserEstimate::cold(int dim) {
  return {Mat::Identity(dim, dim), Vec::Zero(dim), Vec::Zero(dim), 0};
}

ClusterAggregate cluster_aggregate(const std::vector<UserEstimate>& estimates, const std::vector<int>& members) {
  if (members.empty()) throw std::invalid_argument("cluster_aggregate: empty member set");
  const auto dim = estimates.at(static_cast<std::size_t>(members.front())).b.size();
  ClusterAggregate agg;
  agg.members = members;
  agg.m_bar = Mat::Zero(dim, dim);
  agg.b_bar = Vec::Zero(dim);
  for (int i : members) {
    const auto& e = estimates.at(static_cast<std::size_t>(i));
    agg.m_bar += e.m - Mat::Identity(dim, dim);
    agg.b_bar += e.b;
  }
  agg.m_bar.diagonal().array() += 1.0;
  agg.u_bar = solve_spd(agg.m_bar, agg.b_bar);
  return agg;
}

double confidence_bound(const Mat& m_bar, const Vec& x, long t, double alpha) {
  if (t < 1) throw std::invalid_argument("confidence_bound: t must be >= 1");
  if (m_bar.rows() != x.size()) throw std::invalid_argument("confidence_bound: dimension mismatch");
  return bound_from_factor(factor_spd(m_bar, "confidence_bound"), x, t, alpha);
}

double club_radius(long served, double alpha2) {
  const double s = static_cast<double>(served);
  return alpha2 * std::sqrt((1.0 + std::log1p(s)) / (1.0 + s));
}

Agent::Agent(PolicyConfig config, int num_users, int dim, std::uint64_t seed)
    : config_(std::move(config)), dim_(dim), seed_(seed) {
  if (num_users < 1 || dim < 1) throw std::invalid_argument("Agent: need at least one user and dimension");
  if (!(config_.alpha >= 0.0)) throw std::invalid_argument("Agent: alpha must be nonnegative");
  if (config_.graph_period < 1) throw std::invalid_argument("Agent: graph_period must be >= 1");
  if (config_.fixed_sigma && !(*config_.fixed_sigma > 0.0)) {
    throw std::invalid_argument("Agent: fixed sigma must be positive");
  }
  const auto check_labels = [&](const std::vector<int>& labels, const char* what) {
    if (static_cast<int>(labels.size()) != num_users) {
      throw std::invalid_argument(std::string("Agent: ") + what + " has " + std::to_string(labels.size()) +
                                  " labels for " + std::to_string(num_users) + " users");
    }
  };
  switch (config_.variant) {
    case Variant::correct:
      if (config_.labels.empty()) throw std::invalid_argument("Agent: the correct variant requires ground-truth labels");
      check_labels(config_.labels, "ground truth");
      break;
    case Variant::sclub_cd:
    case Variant::weight_sparse:
      if (num_users >= 2 && (config_.n < 1 || config_.n > num_users - 1)) {
        throw std::invalid_argument("Agent: n=" + std::to_string(config_.n) + " outside [1, " +
                                    std::to_string(num_users - 1) + "]");
      }
      break;
    default:
      break;
  }
  if (config_.forced_partition) {
    if (!uses_graph(config_.variant)) {
      throw std::invalid_argument("Agent: forced partitions apply only to graph-clustered variants");
    }
    check_labels(*config_.forced_partition, "forced partition");
  }

  users_.assign(static_cast<std::size_t>(num_users), UserEstimate::cold(dim));
  if (uses_graph(config_.variant)) sq_dist_ = Mat::Zero(num_users, num_users);
  if (config_.variant == Variant::club) {
    club_edges_.assign(static_cast<std::size_t>(num_users), std::vector<char>(static_cast<std::size_t>(num_users), 1));
    for (int i = 0; i < num_users; ++i) club_edges_[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
  }
  recluster(0);
}

RowMat Agent::estimate_matrix() const {
  RowMat out(num_users(), dim_);
  for (int i = 0; i < num_users(); ++i) out.row(i) = users_[static_cast<std::size_t>(i)].u_hat.transpose();
  return out;
}

int Agent::select_arm(const Round& round, const RowMat& items) const {
  if (round.candidates.empty()) throw std::invalid_argument("select_arm: empty pool");
  if (round.user < 0 || round.user >= num_users()) throw std::invalid_argument("select_arm: user out of range");
  const int cluster = partition_.labels[static_cast<std::size_t>(round.user)];
  std::vector<int> members;
  for (int i = 0; i < num_users(); ++i) {
    if (partition_.labels[static_cast<std::size_t>(i)] == cluster) members.push_back(i);
  }
  const ClusterAggregate agg = cluster_aggregate(users_, members);
  const auto llt = factor_spd(agg.m_bar, "select_arm");
  const long t = std::max(1L, round.t);

  int best = -1;
  double best_score = 0.0;
  for (int k : round.candidates) {
    const Vec x = items.row(k).transpose();
    const double score = agg.u_bar.dot(x) + bound_from_factor(llt, x, t, config_.alpha);
    if (best < 0 || score > best_score || (score == best_score && k < best)) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

void Agent::update(int user, const Vec& x, double payoff) {
  if (payoff < 0.0 || payoff > 1.0) throw std::invalid_argument("update: payoff outside [0, 1]");
  if (x.size() != dim_) throw std::invalid_argument("update: feature dimension mismatch");
  auto& e = users_.at(static_cast<std::size_t>(user));
  e.m.noalias() += x * x.transpose();
  e.b += payoff * x;
  e.u_hat = solve_spd(e.m, e.b);
  ++e.served;
  if (sq_dist_.size() > 0) {
    for (int j = 0; j < num_users(); ++j) {
      if (j == user) continue;
      const double s = sq_distance(e.u_hat.data(), users_[static_cast<std::size_t>(j)].u_hat.data(), dim_);
      sq_dist_(user, j) = s;
      sq_dist_(j, user) = s;
    }
  }
  if (config_.variant == Variant::club) club_dirty_.push_back(user);
}

const Partition& Agent::recluster(long t) {
  const int n_users = num_users();
  if (config_.forced_partition) {
    partition_ = Partition::from_labels(*config_.forced_partition);
    last_graph_.reset();
    return partition_;
  }
  switch (config_.variant) {
    case Variant::correct:
      partition_ = Partition::from_labels(config_.labels);
      last_graph_.reset();
      break;
    case Variant::linucb:
      partition_ = Partition::singletons(n_users);
      last_graph_.reset();
      break;
    case Variant::club:
      last_graph_ = club_graph();
      partition_ = connected_components(*last_graph_);
      break;
    case Variant::sclub_cd:
    case Variant::weight:
    case Variant::weight_sparse: {
      if (n_users < 2) {
        partition_ = Partition::single(n_users);
        last_graph_.reset();
        break;
      }
      SimilarityGraph g = similarity_graph_from_sq(sq_dist_, config_.fixed_sigma);
      if (config_.variant == Variant::sclub_cd) {
        g = sparsify_top_n(g, config_.n, true);
      } else if (config_.variant == Variant::weight_sparse) {
        g = sparsify_top_n(g, config_.n, false);
      }
      const std::uint64_t louvain_seed = seed_ ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(t + 1));
      partition_ = louvain(g, louvain_seed);
      last_graph_ = std::move(g);
      break;
    }
  }
  return partition_;
}

SimilarityGraph Agent::club_graph() const {
  const int n = num_users();
  SimilarityGraph g;
  g.weights = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (club_edges_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) g.weights(i, j) = 1.0;
    }
  }
  return g;
}

void Agent::club_maintain(long t) {
  if (config_.variant != Variant::club) throw std::logic_error("club_maintain: agent is not a CLUB policy");
  // Only rows of users whose statistics changed can cross the deletion threshold.
  std::sort(club_dirty_.begin(), club_dirty_.end());
  club_dirty_.erase(std::unique(club_dirty_.begin(), club_dirty_.end()), club_dirty_.end());
  for (int i : club_dirty_) {
    const auto& ei = users_[static_cast<std::size_t>(i)];
    const double ri = club_radius(ei.served, config_.club_alpha2);
    for (int j = 0; j < num_users(); ++j) {
      auto& edge = club_edges_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (!edge) continue;
      const auto& ej = users_[static_cast<std::size_t>(j)];
      if ((ei.u_hat - ej.u_hat).norm() > ri + club_radius(ej.served, config_.club_alpha2)) {
        edge = 0;
        club_edges_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  club_dirty_.clear();
  recluster(t);
}

bool Agent::end_round(long t) {
  if (config_.variant == Variant::club) {
    club_maintain(t);
    return true;
  }
  if (t % config_.graph_period == 0) {
    recluster(t);
    return true;
  }
  return false;
}

}  // namespace sclub
