#pragma once

#include "sclub/numerics.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace sclub {

/// One recommendation opportunity: the user to serve and the candidate pool.
struct Round {
  long t = 0;
  int user = 0;
  std::vector<int> candidates;
};

/// Common face of synthetic and logged worlds as seen by the experiment loop.
class BanditEnvironment {
 public:
  virtual ~BanditEnvironment() = default;

  virtual int num_users() const = 0;
  virtual int dim() const = 0;
  /// Item feature vectors, one per row.
  virtual const RowMat& items() const = 0;
  /// Ground-truth user clusters, when the world has them.
  virtual std::optional<std::vector<int>> ground_truth() const { return std::nullopt; }

  virtual Round next_round(long t) = 0;
  /// Observed payoff in [0, 1] for recommending `item` in `round`.
  virtual double payoff(const Round& round, int item) = 0;
  virtual double regret(const Round& round, int item) const = 0;
};

/// How sigma_c scales user offsets from their cluster centre.
enum class Perturbation {
  per_vector,      // N(0, sigma_c^2 / dim) per coordinate: offset norm is about sigma_c
  per_coordinate,  // N(0, sigma_c^2) per coordinate: offset norm is about sigma_c * sqrt(dim)
};

struct SyntheticParams {
  int users = 100;
  int clusters = 5;
  int items = 1000;
  int dim = 25;
  int pool = 25;
  double sigma_c = 0.25;
  double sigma_eps = 0.25;
  Perturbation perturbation = Perturbation::per_vector;
};

std::string_view to_string(Perturbation p);
Perturbation parse_perturbation(std::string_view name);

/// Clustered users around unit-norm centres, unit-norm item catalogue, Gaussian payoff noise.
class SyntheticWorld final : public BanditEnvironment {
 public:
  /// Deterministic in `seed`: identical seeds give bitwise-identical worlds and round streams.
  static SyntheticWorld generate(const SyntheticParams& params, std::uint64_t seed);

  /// World with explicit vectors (rows); params supplies pool size and payoff noise. Dimensions
  /// and cluster counts in `params` are overwritten from the arguments.
  static SyntheticWorld from_vectors(RowMat centers, std::vector<int> user_cluster, RowMat users, RowMat catalog,
                                     SyntheticParams params, std::uint64_t seed);

  int num_users() const override { return params_.users; }
  int dim() const override { return params_.dim; }
  const RowMat& items() const override { return catalog_; }
  std::optional<std::vector<int>> ground_truth() const override { return user_cluster_; }

  Round next_round(long t) override { return sample_round(t); }
  double payoff(const Round& round, int item) override { return realize_payoff(round.user, item); }
  double regret(const Round& round, int item) const override { return instant_regret(round, item); }

  /// Uniform user, `pool` distinct items drawn uniformly from the catalogue.
  Round sample_round(long t);
  /// clamp(u^T x + noise, 0, 1) with a fresh noise draw.
  double realize_payoff(int user, int item);
  double expected_payoff(int user, int item) const;
  /// Best expected payoff in the pool minus that of `chosen` (unclamped, noiseless).
  double instant_regret(const Round& round, int chosen) const;

  const SyntheticParams& params() const { return params_; }
  const RowMat& cluster_centers() const { return centers_; }
  const RowMat& user_vectors() const { return users_; }
  const std::vector<int>& user_cluster() const { return user_cluster_; }

 private:
  SyntheticWorld() = default;

  SyntheticParams params_;
  RowMat centers_;
  RowMat users_;
  RowMat catalog_;
  std::vector<int> user_cluster_;
  std::vector<int> pool_buffer_;
  std::mt19937_64 round_rng_;
  std::mt19937_64 noise_rng_;
};

/// Free-function aliases mirroring the member operations.
SyntheticWorld generate_world(const SyntheticParams& params, std::uint64_t seed);

/// Replay world: one positive plus pool-1 non-positive items per round.
class LoggedWorld final : public BanditEnvironment {
 public:
  LoggedWorld(RowMat item_features, std::vector<std::vector<int>> positives, int pool,
              std::uint64_t seed);

  int num_users() const override { return static_cast<int>(positives_.size()); }
  int dim() const override { return static_cast<int>(features_.cols()); }
  const RowMat& items() const override { return features_; }

  Round next_round(long t) override;
  double payoff(const Round& round, int item) override;
  /// 1 - payoff: the pool's best payoff is always 1.
  double regret(const Round& round, int item) const override;

  struct Sample {
    Round round;
    std::vector<double> payoffs;  // aligned with round.candidates
  };
  Sample sample_round(int pool, long t);

  const std::vector<std::vector<int>>& positives() const { return positives_; }
  const std::vector<int>& active_users() const { return active_users_; }

 private:
  double table_lookup(const Round& round, int item) const;

  RowMat features_;
  std::vector<std::vector<int>> positives_;  // sorted
  std::vector<int> active_users_;
  int pool_;
  std::mt19937_64 rng_;
  Round last_round_;
  std::vector<double> last_payoffs_;
};

}  // namespace sclub
