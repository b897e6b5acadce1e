#include "sclub/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sclub {

namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

RowMat unit_gaussian_rows(int rows, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMat out(rows, dim);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < dim; ++c) out(r, c) = normal(rng);
    out.row(r) /= out.row(r).norm();
  }
  return out;
}

// Draws `count` distinct indices from [0, n) into the front of `buffer` (partial Fisher-Yates).
std::vector<int> draw_distinct(std::vector<int>& buffer, int count, std::mt19937_64& rng) {
  const int n = static_cast<int>(buffer.size());
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(buffer[static_cast<std::size_t>(i)], buffer[static_cast<std::size_t>(pick(rng))]);
  }
  return {buffer.begin(), buffer.begin() + count};
}

}  // namespace

std::string_view to_string(Perturbation p) {
  return p == Perturbation::per_vector ? "per_vector" : "per_coordinate";
}

Perturbation parse_perturbation(std::string_view name) {
  if (name == "per_vector") return Perturbation::per_vector;
  if (name == "per_coordinate") return Perturbation::per_coordinate;
  throw std::invalid_argument("unknown perturbation '" + std::string(name) + "'");
}

SyntheticWorld SyntheticWorld::generate(const SyntheticParams& p, std::uint64_t seed) {
  if (p.users < 1 || p.clusters < 1 || p.items < 1 || p.dim < 1 || p.pool < 1) {
    throw std::invalid_argument("generate_world: all dimensions must be positive");
  }
  if (p.clusters > p.users) {
    throw std::invalid_argument("generate_world: more clusters (" + std::to_string(p.clusters) +
                                ") than users (" + std::to_string(p.users) + ")");
  }
  if (p.pool > p.items) throw std::invalid_argument("generate_world: pool larger than catalogue");
  if (p.sigma_c < 0.0 || p.sigma_eps < 0.0) {
    throw std::invalid_argument("generate_world: noise levels must be nonnegative");
  }

  SyntheticWorld w;
  w.params_ = p;
  auto gen = make_stream(seed, 0);
  w.centers_ = unit_gaussian_rows(p.clusters, p.dim, gen);

  // Equal blocks; the remainder goes to the last clusters.
  const int base = p.users / p.clusters;
  const int extra = p.users % p.clusters;
  w.user_cluster_.reserve(static_cast<std::size_t>(p.users));
  for (int j = 0; j < p.clusters; ++j) {
    const int size = base + (j >= p.clusters - extra ? 1 : 0);
    w.user_cluster_.insert(w.user_cluster_.end(), static_cast<std::size_t>(size), j);
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  const double spread =
      p.perturbation == Perturbation::per_vector ? p.sigma_c / std::sqrt(static_cast<double>(p.dim)) : p.sigma_c;
  w.users_.resize(p.users, p.dim);
  for (int i = 0; i < p.users; ++i) {
    for (int c = 0; c < p.dim; ++c) {
      w.users_(i, c) = w.centers_(w.user_cluster_[static_cast<std::size_t>(i)], c) + spread * normal(gen);
    }
  }
  w.catalog_ = unit_gaussian_rows(p.items, p.dim, gen);

  w.pool_buffer_.resize(static_cast<std::size_t>(p.items));
  for (int k = 0; k < p.items; ++k) w.pool_buffer_[static_cast<std::size_t>(k)] = k;
  w.round_rng_ = make_stream(seed, 1);
  w.noise_rng_ = make_stream(seed, 2);
  return w;
}

SyntheticWorld SyntheticWorld::from_vectors(RowMat centers, std::vector<int> user_cluster, RowMat users,
                                            RowMat catalog, SyntheticParams params, std::uint64_t seed) {
  const auto dim = centers.cols();
  if (users.cols() != dim || catalog.cols() != dim || dim < 1) {
    throw std::invalid_argument("from_vectors: centres, users and items must share one positive dimension");
  }
  if (static_cast<Eigen::Index>(user_cluster.size()) != users.rows() || users.rows() < 1) {
    throw std::invalid_argument("from_vectors: need one cluster label per user");
  }
  for (int c : user_cluster) {
    if (c < 0 || c >= centers.rows()) throw std::invalid_argument("from_vectors: cluster label out of range");
  }
  if (params.pool < 1 || params.pool > catalog.rows()) throw std::invalid_argument("from_vectors: bad pool size");
  params.users = static_cast<int>(users.rows());
  params.clusters = static_cast<int>(centers.rows());
  params.items = static_cast<int>(catalog.rows());
  params.dim = static_cast<int>(dim);

  SyntheticWorld w;
  w.params_ = params;
  w.centers_ = std::move(centers);
  w.user_cluster_ = std::move(user_cluster);
  w.users_ = std::move(users);
  w.catalog_ = std::move(catalog);
  w.pool_buffer_.resize(static_cast<std::size_t>(params.items));
  for (int k = 0; k < params.items; ++k) w.pool_buffer_[static_cast<std::size_t>(k)] = k;
  w.round_rng_ = make_stream(seed, 1);
  w.noise_rng_ = make_stream(seed, 2);
  return w;
}

SyntheticWorld generate_world(const SyntheticParams& params, std::uint64_t seed) {
  return SyntheticWorld::generate(params, seed);
}

Round SyntheticWorld::sample_round(long t) {
  if (t < 1) throw std::invalid_argument("sample_round: t must be >= 1");
  Round r;
  r.t = t;
  r.user = std::uniform_int_distribution<int>(0, params_.users - 1)(round_rng_);
  r.candidates = draw_distinct(pool_buffer_, params_.pool, round_rng_);
  return r;
}

double SyntheticWorld::expected_payoff(int user, int item) const {
  return users_.row(user).dot(catalog_.row(item));
}

double SyntheticWorld::realize_payoff(int user, int item) {
  const double noise = params_.sigma_eps * std::normal_distribution<double>(0.0, 1.0)(noise_rng_);
  return std::clamp(expected_payoff(user, item) + noise, 0.0, 1.0);
}

double SyntheticWorld::instant_regret(const Round& round, int chosen) const {
  if (std::find(round.candidates.begin(), round.candidates.end(), chosen) == round.candidates.end()) {
    throw std::invalid_argument("instant_regret: item " + std::to_string(chosen) + " is not in the pool");
  }
  double best = expected_payoff(round.user, round.candidates.front());
  for (int k : round.candidates) best = std::max(best, expected_payoff(round.user, k));
  return std::max(0.0, best - expected_payoff(round.user, chosen));
}

LoggedWorld::LoggedWorld(RowMat item_features, std::vector<std::vector<int>> positives, int pool,
                         std::uint64_t seed)
    : features_(std::move(item_features)),
      positives_(std::move(positives)),
      pool_(pool),
      rng_(make_stream(seed, 3)) {
  if (pool_ < 1) throw std::invalid_argument("LoggedWorld: pool size must be >= 1");
  if (features_.rows() < pool_) {
    throw std::invalid_argument("LoggedWorld: catalogue of " + std::to_string(features_.rows()) +
                                " items is smaller than the pool size " + std::to_string(pool_));
  }
  for (std::size_t u = 0; u < positives_.size(); ++u) {
    auto& pos = positives_[u];
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    for (int k : pos) {
      if (k < 0 || k >= features_.rows()) {
        throw std::invalid_argument("LoggedWorld: positive item index " + std::to_string(k) + " out of range");
      }
    }
    if (!pos.empty()) active_users_.push_back(static_cast<int>(u));
  }
  if (active_users_.empty()) throw std::invalid_argument("LoggedWorld: no user has a positive item");
}

LoggedWorld::Sample LoggedWorld::sample_round(int pool, long t) {
  if (pool < 1) throw std::invalid_argument("sample_logged_round: pool size must be >= 1");
  if (features_.rows() < pool) throw std::invalid_argument("sample_logged_round: catalogue smaller than pool");
  const int n_items = static_cast<int>(features_.rows());

  Sample s;
  s.round.t = t;
  s.round.user = active_users_[std::uniform_int_distribution<std::size_t>(0, active_users_.size() - 1)(rng_)];
  const auto& pos = positives_[static_cast<std::size_t>(s.round.user)];
  const int negatives_needed = pool - 1;
  const int available = n_items - static_cast<int>(pos.size());
  if (available < negatives_needed) {
    throw std::runtime_error("sample_logged_round: user " + std::to_string(s.round.user) + " has only " +
                             std::to_string(available) + " non-positive items, need " +
                             std::to_string(negatives_needed));
  }

  const int positive = pos[std::uniform_int_distribution<std::size_t>(0, pos.size() - 1)(rng_)];
  s.round.candidates.reserve(static_cast<std::size_t>(pool));
  s.round.candidates.push_back(positive);
  auto is_positive = [&](int k) { return std::binary_search(pos.begin(), pos.end(), k); };

  if (available >= 4 * negatives_needed) {
    std::uniform_int_distribution<int> item(0, n_items - 1);
    while (static_cast<int>(s.round.candidates.size()) < pool) {
      const int k = item(rng_);
      if (is_positive(k)) continue;
      if (std::find(s.round.candidates.begin(), s.round.candidates.end(), k) != s.round.candidates.end()) continue;
      s.round.candidates.push_back(k);
    }
  } else {
    std::vector<int> others;
    others.reserve(static_cast<std::size_t>(available));
    for (int k = 0; k < n_items; ++k) {
      if (!is_positive(k)) others.push_back(k);
    }
    const auto chosen = draw_distinct(others, negatives_needed, rng_);
    s.round.candidates.insert(s.round.candidates.end(), chosen.begin(), chosen.end());
  }
  std::shuffle(s.round.candidates.begin(), s.round.candidates.end(), rng_);
  s.payoffs.reserve(s.round.candidates.size());
  for (int k : s.round.candidates) s.payoffs.push_back(k == positive ? 1.0 : 0.0);
  return s;
}

Round LoggedWorld::next_round(long t) {
  auto s = sample_round(pool_, t);
  last_round_ = s.round;
  last_payoffs_ = std::move(s.payoffs);
  return s.round;
}

double LoggedWorld::table_lookup(const Round& round, int item) const {
  if (round.t != last_round_.t || round.user != last_round_.user) {
    throw std::logic_error("LoggedWorld: payoff requested for a round other than the current one");
  }
  const auto it = std::find(last_round_.candidates.begin(), last_round_.candidates.end(), item);
  if (it == last_round_.candidates.end()) {
    throw std::invalid_argument("LoggedWorld: item " + std::to_string(item) + " is not in the pool");
  }
  return last_payoffs_[static_cast<std::size_t>(it - last_round_.candidates.begin())];
}

double LoggedWorld::payoff(const Round& round, int item) {
  return table_lookup(round, item);
}

double LoggedWorld::regret(const Round& round, int item) const {
  return 1.0 - table_lookup(round, item);
}

}  // namespace sclub
