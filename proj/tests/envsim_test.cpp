#include "sclub/envsim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using sclub::LoggedWorld;
using sclub::RowMat;
using sclub::SyntheticParams;
using sclub::SyntheticWorld;

namespace {

SyntheticParams paper_world() {
  SyntheticParams p;
  p.users = 100;
  p.clusters = 5;
  p.items = 1000;
  p.dim = 25;
  p.pool = 25;
  p.sigma_c = 0.25;
  p.sigma_eps = 0.25;
  return p;
}

// One-user world in d=2 whose single expected payoff against item 0 is `mu`.
SyntheticWorld scalar_world(double mu, double sigma_eps, int items = 1) {
  RowMat centers(1, 2);
  centers << mu, 0.0;
  RowMat catalog = RowMat::Zero(items, 2);
  for (int k = 0; k < items; ++k) catalog(k, 0) = 1.0;
  SyntheticParams p;
  p.pool = 1;
  p.sigma_eps = sigma_eps;
  return SyntheticWorld::from_vectors(centers, {0}, centers, catalog, p, 9);
}

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// E[clamp(mu + e, 0, 1)] - clamp(mu, 0, 1), e ~ N(0, s^2), by composite Simpson.
double clamped_offset(double mu, double s) {
  const int n = 20000;
  const double lo = -10.0;
  const double hi = 10.0;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::clamp(mu + s * z, 0.0, 1.0) * phi(z);
  }
  return acc * h / 3.0 - std::clamp(mu, 0.0, 1.0);
}

}  // namespace

TEST(Generate, PaperWorldHasEqualClusters) {
  const auto w = SyntheticWorld::generate(paper_world(), 1);
  std::vector<int> sizes(5, 0);
  for (int c : w.user_cluster()) ++sizes[static_cast<std::size_t>(c)];
  for (int s : sizes) EXPECT_EQ(s, 20);
  EXPECT_EQ(w.items().rows(), 1000);
  EXPECT_EQ(w.items().cols(), 25);
  for (int k = 0; k < 1000; ++k) EXPECT_NEAR(w.items().row(k).norm(), 1.0, 1e-12);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(w.cluster_centers().row(j).norm(), 1.0, 1e-12);
}

TEST(Generate, RemainderGoesToLastClusters) {
  SyntheticParams p = paper_world();
  p.users = 12;
  p.clusters = 5;
  const auto w = SyntheticWorld::generate(p, 1);
  const std::vector<int> expected{0, 0, 1, 1, 2, 2, 3, 3, 3, 4, 4, 4};
  EXPECT_EQ(w.user_cluster(), expected);
}

TEST(Generate, ZeroIntraClusterNoiseCopiesCentres) {
  SyntheticParams p = paper_world();
  p.sigma_c = 0.0;
  const auto w = SyntheticWorld::generate(p, 3);
  for (int i = 0; i < p.users; ++i) {
    EXPECT_EQ(w.user_vectors().row(i), w.cluster_centers().row(w.user_cluster()[static_cast<std::size_t>(i)]));
  }
}

TEST(Generate, SameSeedIsBitwiseIdentical) {
  auto a = SyntheticWorld::generate(paper_world(), 42);
  auto b = SyntheticWorld::generate(paper_world(), 42);
  EXPECT_EQ(a.user_vectors(), b.user_vectors());
  EXPECT_EQ(a.items(), b.items());
  for (long t = 1; t <= 50; ++t) {
    const auto ra = a.sample_round(t);
    const auto rb = b.sample_round(t);
    EXPECT_EQ(ra.user, rb.user);
    EXPECT_EQ(ra.candidates, rb.candidates);
    EXPECT_EQ(a.realize_payoff(ra.user, ra.candidates[0]), b.realize_payoff(rb.user, rb.candidates[0]));
  }
  auto c = SyntheticWorld::generate(paper_world(), 43);
  EXPECT_NE(a.user_vectors(), c.user_vectors());
}

TEST(Generate, PerturbationScaling) {
  SyntheticParams p = paper_world();
  p.users = 2000;
  p.clusters = 1;
  p.sigma_c = 0.5;
  auto spread = [](const SyntheticWorld& w) {
    double acc = 0.0;
    for (int i = 0; i < w.params().users; ++i) acc += (w.user_vectors().row(i) - w.cluster_centers().row(0)).squaredNorm();
    return std::sqrt(acc / w.params().users);
  };
  EXPECT_NEAR(spread(SyntheticWorld::generate(p, 2)), 0.5, 0.02);
  p.perturbation = sclub::Perturbation::per_coordinate;
  EXPECT_NEAR(spread(SyntheticWorld::generate(p, 2)), 0.5 * 5.0, 0.1);
}

TEST(Generate, RejectsBadShapes) {
  SyntheticParams p = paper_world();
  p.clusters = 101;
  EXPECT_THROW(SyntheticWorld::generate(p, 1), std::invalid_argument);
  p = paper_world();
  p.dim = 0;
  EXPECT_THROW(SyntheticWorld::generate(p, 1), std::invalid_argument);
}

TEST(SampleRound, FullPoolIsPermutation) {
  SyntheticParams p = paper_world();
  p.items = 30;
  p.pool = 30;
  auto w = SyntheticWorld::generate(p, 5);
  for (long t = 1; t <= 5; ++t) {
    auto r = w.sample_round(t);
    std::sort(r.candidates.begin(), r.candidates.end());
    for (int k = 0; k < 30; ++k) EXPECT_EQ(r.candidates[static_cast<std::size_t>(k)], k);
  }
}

TEST(SampleRound, DistinctCandidatesInRange) {
  auto w = SyntheticWorld::generate(paper_world(), 6);
  for (long t = 1; t <= 200; ++t) {
    const auto r = w.sample_round(t);
    EXPECT_EQ(r.t, t);
    ASSERT_EQ(r.candidates.size(), 25u);
    std::set<int> uniq(r.candidates.begin(), r.candidates.end());
    EXPECT_EQ(uniq.size(), 25u);
    EXPECT_GE(*uniq.begin(), 0);
    EXPECT_LT(*uniq.rbegin(), 1000);
  }
  EXPECT_THROW(w.sample_round(0), std::invalid_argument);
}

TEST(SampleRound, UserFrequenciesWithinFourSigma) {
  auto w = SyntheticWorld::generate(paper_world(), 7);
  std::vector<int> counts(100, 0);
  const int rounds = 10000;
  for (long t = 1; t <= rounds; ++t) ++counts[static_cast<std::size_t>(w.sample_round(t).user)];
  const double mean = rounds / 100.0;
  const double sd = std::sqrt(rounds * 0.01 * 0.99);
  for (int c : counts) EXPECT_LE(std::abs(c - mean), 4.0 * sd);
}

TEST(Payoff, NoiselessValueAndClamp) {
  auto w = scalar_world(0.6, 0.0);
  EXPECT_DOUBLE_EQ(w.realize_payoff(0, 0), 0.6);
  auto high = scalar_world(1.7, 0.0);
  EXPECT_EQ(high.realize_payoff(0, 0), 1.0);
  auto low = scalar_world(-0.4, 0.0);
  EXPECT_EQ(low.realize_payoff(0, 0), 0.0);
}

TEST(Payoff, ClampedNoiseMeanMatchesIntegration) {
  for (double mu : {0.1, 0.6, 0.95}) {
    auto w = scalar_world(mu, 0.25);
    const int draws = 100000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) acc += w.realize_payoff(0, 0) - std::clamp(mu, 0.0, 1.0);
    EXPECT_NEAR(acc / draws, clamped_offset(mu, 0.25), 3.0 * 0.25 / std::sqrt(double(draws))) << "mu=" << mu;
  }
}

TEST(Payoff, NoiselessSameClusterUsersAgree) {
  SyntheticParams p = paper_world();
  p.sigma_c = 0.0;
  p.sigma_eps = 0.0;
  auto w = SyntheticWorld::generate(p, 8);
  for (int k = 0; k < 1000; k += 37) {
    EXPECT_EQ(w.realize_payoff(0, k), w.realize_payoff(19, k));
    EXPECT_EQ(w.realize_payoff(20, k), w.realize_payoff(39, k));
  }
}

TEST(Regret, HandPool) {
  RowMat centers(1, 2);
  centers << 1.0, 0.0;
  RowMat catalog(2, 2);
  catalog << 0.8, 0.0, 0.5, 0.0;
  SyntheticParams p;
  p.pool = 2;
  const auto w = SyntheticWorld::from_vectors(centers, {0}, centers, catalog, p, 1);
  sclub::Round r{1, 0, {0, 1}};
  EXPECT_NEAR(w.instant_regret(r, 1), 0.3, 1e-15);
  EXPECT_EQ(w.instant_regret(r, 0), 0.0);
}

TEST(Regret, MatchesBruteForceAndIsNonNegative) {
  auto w = SyntheticWorld::generate(paper_world(), 10);
  std::mt19937_64 rng(1);
  for (long t = 1; t <= 300; ++t) {
    const auto r = w.sample_round(t);
    const int chosen = r.candidates[std::uniform_int_distribution<std::size_t>(0, r.candidates.size() - 1)(rng)];
    double best = -1e300;
    for (int k : r.candidates) {
      double dot = 0.0;
      for (int c = 0; c < 25; ++c) dot += w.user_vectors()(r.user, c) * w.items()(k, c);
      best = std::max(best, dot);
    }
    double chosen_dot = 0.0;
    for (int c = 0; c < 25; ++c) chosen_dot += w.user_vectors()(r.user, c) * w.items()(chosen, c);
    const double reg = w.instant_regret(r, chosen);
    EXPECT_NEAR(reg, best - chosen_dot, 1e-12);
    EXPECT_GE(reg, 0.0);
    EXPECT_EQ(reg == 0.0, std::abs(best - chosen_dot) < 1e-15);
  }
}

TEST(Regret, ItemOutsidePoolThrows) {
  auto w = SyntheticWorld::generate(paper_world(), 11);
  auto r = w.sample_round(1);
  int outside = 0;
  while (std::find(r.candidates.begin(), r.candidates.end(), outside) != r.candidates.end()) ++outside;
  EXPECT_THROW(w.instant_regret(r, outside), std::invalid_argument);
}

TEST(Regret, RandomPolicyMatchesEnumeration) {
  SyntheticParams p;
  p.users = 10;
  p.clusters = 2;
  p.items = 20;
  p.dim = 5;
  p.pool = 5;
  auto w = SyntheticWorld::generate(p, 12);

  // Exact expectation: average over users and all C(20,5) pools of (max - mean) expected payoff.
  double exact = 0.0;
  long pools = 0;
  std::vector<int> idx{0, 1, 2, 3, 4};
  for (int user = 0; user < 10; ++user) {
    std::vector<bool> mask(20, false);
    std::fill(mask.begin(), mask.begin() + 5, true);
    do {
      double best = -1e300;
      double sum = 0.0;
      for (int k = 0; k < 20; ++k) {
        if (!mask[static_cast<std::size_t>(k)]) continue;
        const double v = w.user_vectors().row(user).dot(w.items().row(k));
        best = std::max(best, v);
        sum += v;
      }
      exact += best - sum / 5.0;
      ++pools;
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
  exact /= static_cast<double>(pools);

  std::mt19937_64 rng(99);
  double total = 0.0;
  const int horizon = 5000;
  for (long t = 1; t <= horizon; ++t) {
    const auto r = w.sample_round(t);
    const int chosen = r.candidates[std::uniform_int_distribution<std::size_t>(0, 4)(rng)];
    total += w.instant_regret(r, chosen);
  }
  EXPECT_NEAR(total / horizon, exact, 0.1 * exact);
}

namespace {

LoggedWorld toy_logged(int pool, std::uint64_t seed) {
  RowMat features(40, 3);
  for (int k = 0; k < 40; ++k) features.row(k) << k, 1.0, -k;
  std::vector<std::vector<int>> positives{{0, 5, 9}, {}, {3}, {10, 11, 12, 13}};
  return LoggedWorld(features, positives, pool, seed);
}

}  // namespace

TEST(Logged, PoolOfOneIsThePositive) {
  auto w = toy_logged(1, 1);
  for (long t = 1; t <= 20; ++t) {
    const auto s = w.sample_round(1, t);
    ASSERT_EQ(s.round.candidates.size(), 1u);
    EXPECT_EQ(s.payoffs[0], 1.0);
    const auto& pos = w.positives()[static_cast<std::size_t>(s.round.user)];
    EXPECT_TRUE(std::binary_search(pos.begin(), pos.end(), s.round.candidates[0]));
  }
}

TEST(Logged, ExactlyOnePositiveAndUsersWithPositives) {
  auto w = toy_logged(25, 2);
  for (long t = 1; t <= 200; ++t) {
    const auto s = w.sample_round(25, t);
    EXPECT_NE(s.round.user, 1);
    EXPECT_EQ(std::count(s.payoffs.begin(), s.payoffs.end(), 1.0), 1);
    std::set<int> uniq(s.round.candidates.begin(), s.round.candidates.end());
    EXPECT_EQ(uniq.size(), 25u);
    const auto& pos = w.positives()[static_cast<std::size_t>(s.round.user)];
    for (std::size_t i = 0; i < s.payoffs.size(); ++i) {
      const bool is_pos = std::binary_search(pos.begin(), pos.end(), s.round.candidates[i]);
      if (s.payoffs[i] == 0.0) EXPECT_FALSE(is_pos);
    }
  }
}

TEST(Logged, PositivePositionIsUniform) {
  auto w = toy_logged(25, 3);
  std::vector<int> counts(25, 0);
  const int draws = 10000;
  for (long t = 1; t <= draws; ++t) {
    const auto s = w.sample_round(25, t);
    const auto it = std::find(s.payoffs.begin(), s.payoffs.end(), 1.0);
    ++counts[static_cast<std::size_t>(it - s.payoffs.begin())];
  }
  double chi2 = 0.0;
  const double expected = draws / 25.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 51.179);  // chi-square, 24 dof, 0.001 level
}

TEST(Logged, RegretIsOneMinusPayoffForCurrentRound) {
  auto w = toy_logged(10, 4);
  const auto r = w.next_round(1);
  for (int k : r.candidates) EXPECT_EQ(w.regret(r, k), 1.0 - w.payoff(r, k));
  sclub::Round stale = r;
  stale.t = 2;
  EXPECT_THROW(w.payoff(stale, r.candidates[0]), std::logic_error);
}

TEST(Logged, Errors) {
  RowMat features(5, 2);
  features.setOnes();
  EXPECT_THROW(LoggedWorld(features, {{0}}, 6, 1), std::invalid_argument);
  EXPECT_THROW(LoggedWorld(features, {{}, {}}, 2, 1), std::invalid_argument);
  EXPECT_THROW(LoggedWorld(features, {{7}}, 2, 1), std::invalid_argument);
  LoggedWorld crowded(features, {{0, 1, 2, 3}}, 2, 1);
  EXPECT_THROW(crowded.sample_round(3, 1), std::runtime_error);
}

TEST(Logged, SameSeedSameStream) {
  auto a = toy_logged(8, 5);
  auto b = toy_logged(8, 5);
  for (long t = 1; t <= 50; ++t) {
    const auto sa = a.sample_round(8, t);
    const auto sb = b.sample_round(8, t);
    EXPECT_EQ(sa.round.user, sb.round.user);
    EXPECT_EQ(sa.round.candidates, sb.round.candidates);
    EXPECT_EQ(sa.payoffs, sb.payoffs);
  }
}
