#include "sclub/numerics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using sclub::Mat;
using sclub::Vec;

using oracle::Dense;
using oracle::gauss_inverse;
using oracle::gauss_solve;
using oracle::jacobi_eigenvalues;
using oracle::to_dense;

double determinant(Dense a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[col], a[piv]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

Mat random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  return a * a.transpose() + d * Mat::Identity(d, d);
}

Vec random_vec(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(RankOneUpdate, IdentityPlusAxis) {
  const Mat r = sclub::rank_one_update(Mat::Identity(2, 2), v2(1, 0));
  EXPECT_EQ(r(0, 0), 2.0);
  EXPECT_EQ(r(0, 1), 0.0);
  EXPECT_EQ(r(1, 0), 0.0);
  EXPECT_EQ(r(1, 1), 1.0);
}

TEST(RankOneUpdate, IdentityPlusDiagonal) {
  const Mat r = sclub::rank_one_update(Mat::Identity(2, 2), v2(1, 1));
  EXPECT_EQ(r(0, 0), 2.0);
  EXPECT_EQ(r(0, 1), 1.0);
  EXPECT_EQ(r(1, 0), 1.0);
  EXPECT_EQ(r(1, 1), 2.0);
}

TEST(RankOneUpdate, MatchesElementwiseLoop) {
  std::mt19937_64 rng(11);
  const Mat m = random_spd(25, rng);
  const Vec x = random_vec(25, rng);
  const Mat r = sclub::rank_one_update(m, x);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 25; ++j) EXPECT_EQ(r(i, j), m(i, j) + x(i) * x(j));
  EXPECT_EQ((r - r.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(RankOneUpdate, DimensionMismatchThrows) {
  EXPECT_THROW(sclub::rank_one_update(Mat::Identity(3, 3), v2(1, 0)), std::invalid_argument);
}

TEST(RankOneUpdate, PreservesLeadingMinorsPositive) {
  std::mt19937_64 rng(5);
  for (int d = 1; d <= 5; ++d) {
    Mat m = random_spd(d, rng);
    for (int step = 0; step < 20; ++step) {
      m = sclub::rank_one_update(m, random_vec(d, rng));
      const Dense dm = to_dense(m);
      for (int k = 1; k <= d; ++k) {
        Dense minor(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) minor[i][j] = dm[i][j];
        EXPECT_GT(determinant(minor), 0.0) << "d=" << d << " k=" << k;
      }
    }
  }
}

TEST(SolveSpd, IdentitySystem) {
  const Vec u = sclub::solve_spd(Mat::Identity(2, 2), v2(3, -1));
  EXPECT_EQ(u(0), 3.0);
  EXPECT_EQ(u(1), -1.0);
}

TEST(SolveSpd, ScaledIdentity) {
  const Vec u = sclub::solve_spd(2.0 * Mat::Identity(2, 2), v2(2, 4));
  EXPECT_DOUBLE_EQ(u(0), 1.0);
  EXPECT_DOUBLE_EQ(u(1), 2.0);
}

TEST(SolveSpd, MatchesEliminationAndResidualBound) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial;
    const Mat m = random_spd(d, rng);
    const Vec b = random_vec(d, rng);
    const Vec u = sclub::solve_spd(m, b);
    const auto oracle = gauss_solve(to_dense(m), std::vector<double>(b.data(), b.data() + d));
    for (int i = 0; i < d; ++i) EXPECT_NEAR(u(i), oracle[i], 1e-8);
    EXPECT_LE((m * u - b).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + b.cwiseAbs().maxCoeff()));
  }
}

TEST(SolveSpd, IndefiniteThrows) {
  Mat m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_THROW(sclub::solve_spd(m, v2(1, 1)), sclub::NotPositiveDefinite);
}

TEST(InvRankOneUpdate, IdentityPlusAxis) {
  const Mat r = sclub::inv_rank_one_update(Mat::Identity(2, 2), v2(1, 0));
  EXPECT_DOUBLE_EQ(r(0, 0), 0.5);
  EXPECT_EQ(r(0, 1), 0.0);
  EXPECT_EQ(r(1, 0), 0.0);
  EXPECT_EQ(r(1, 1), 1.0);
}

TEST(InvRankOneUpdate, ZeroVectorIsNoOp) {
  const Mat r = sclub::inv_rank_one_update(Mat::Identity(2, 2), v2(0, 0));
  EXPECT_EQ(r, Mat::Identity(2, 2));
}

TEST(InvRankOneUpdate, TenThousandUpdatesTrackDirectInverse) {
  std::mt19937_64 rng(2024);
  const int d = 25;
  Mat m = Mat::Identity(d, d);
  Mat minv = Mat::Identity(d, d);
  for (int step = 0; step < 10000; ++step) {
    Vec x = random_vec(d, rng);
    x /= x.norm();
    m = sclub::rank_one_update(m, x);
    minv = sclub::inv_rank_one_update(minv, x);
  }
  const Dense oracle = gauss_inverse(to_dense(m));
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) worst = std::max(worst, std::abs(minv(i, j) - oracle[i][j]));
  EXPECT_LE(worst, 1e-6);
}

TEST(InvRankOneUpdate, AgreesWithDirectSolve) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 6;
    const Mat m = random_spd(d, rng);
    const Vec x = random_vec(d, rng);
    const Vec b = random_vec(d, rng);
    const Vec direct = sclub::solve_spd(sclub::rank_one_update(m, x), b);
    const Vec incremental = sclub::inv_rank_one_update(m.inverse(), x) * b;
    EXPECT_LE((direct - incremental).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Pca, RankOneLineRecovered) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Vec dir(3);
  dir << 1.0, -2.0, 0.5;
  dir /= dir.norm();
  Mat rows(40, 3);
  for (int i = 0; i < 40; ++i) rows.row(i) = g(rng) * dir.transpose();
  const auto basis = sclub::pca_fit(rows, 1);
  EXPECT_GE(std::abs(basis.components.col(0).dot(dir)), 1.0 - 1e-8);
}

TEST(Pca, FullRankIsLossless) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Mat rows(200, 2);
  for (int i = 0; i < 200; ++i) rows.row(i) << g(rng), g(rng);
  const auto basis = sclub::pca_fit(rows, 2);
  const Mat centred = rows.rowwise() - basis.mean.transpose();
  const Mat back = centred * basis.components * basis.components.transpose();
  EXPECT_LE((back - centred).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, ExplainedVarianceMatchesJacobiOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Mat rows(100, 10);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 10; ++j) rows(i, j) = g(rng) * (1.0 + j);
  const auto basis = sclub::pca_fit(rows, 3);

  Vec mean = rows.colwise().mean().transpose();
  Dense cov(10, std::vector<double>(10, 0.0));
  for (int i = 0; i < 100; ++i)
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) cov[a][b] += (rows(i, a) - mean(a)) * (rows(i, b) - mean(b)) / 99.0;
  const auto oracle = jacobi_eigenvalues(cov);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(basis.eigenvalues(k), oracle[k], 1e-8);

  // Variance captured along each component equals its eigenvalue.
  const Mat proj = sclub::pca_project(basis, rows);
  for (int k = 0; k < 3; ++k) {
    const double var = proj.col(k).squaredNorm() / 99.0;
    EXPECT_NEAR(var, oracle[k], 1e-8);
  }
}

TEST(Pca, OrthonormalSortedAndSigned) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Mat rows(60, 12);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 12; ++j) rows(i, j) = g(rng);
  const auto basis = sclub::pca_fit(rows, 5);
  const Mat gram = basis.components.transpose() * basis.components;
  EXPECT_LE((gram - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
  for (int k = 0; k + 1 < 5; ++k) EXPECT_GE(basis.eigenvalues(k), basis.eigenvalues(k + 1));
  for (int k = 0; k < 5; ++k) {
    Eigen::Index idx = 0;
    basis.components.col(k).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(basis.components(idx, k), 0.0);
  }
}

TEST(Pca, WideDataUsesFewSamples) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Mat rows(8, 30);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 30; ++j) rows(i, j) = g(rng);
  const auto basis = sclub::pca_fit(rows, 7);
  const Mat gram = basis.components.transpose() * basis.components;
  EXPECT_LE((gram - Mat::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, RankDeficientReportsAchievableRank) {
  Mat rows(10, 4);
  for (int i = 0; i < 10; ++i) rows.row(i) << i, 2.0 * i, 0.0, 1.0;
  try {
    sclub::pca_fit(rows, 2);
    FAIL() << "expected RankDeficient";
  } catch (const sclub::RankDeficient& e) {
    EXPECT_EQ(e.achievable_rank(), 1);
  }
}

TEST(Rbf, EqualVectorsGiveOne) {
  EXPECT_EQ(sclub::rbf_weight(v2(0.3, -1), v2(0.3, -1), 0.7), 1.0);
}

TEST(Rbf, TwoSigmaSquaredGivesInverseE) {
  const double sigma = 0.5;
  // |u - v|^2 = 2 sigma^2
  const Vec u = v2(0, 0);
  const Vec v = v2(sigma, sigma);
  EXPECT_NEAR(sclub::rbf_weight(u, v, sigma), 0.36787944117144233, 1e-15);
}

TEST(Rbf, MatchesIndependentDistance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec u = random_vec(9, rng);
    const Vec v = random_vec(9, rng);
    double sq = 0.0;
    for (int i = 0; i < 9; ++i) sq += (u(i) - v(i)) * (u(i) - v(i));
    EXPECT_NEAR(sclub::rbf_weight(u, v, 1.0), std::exp(-sq / 2.0), 1e-12);
    EXPECT_EQ(sclub::rbf_weight(u, v, 1.3), sclub::rbf_weight(v, u, 1.3));
  }
}

TEST(Rbf, StrictlyDecreasingInDistance) {
  double prev = 2.0;
  for (int i = 0; i < 20; ++i) {
    const double w = sclub::rbf_weight(v2(0, 0), v2(0.1 * i, 0), 1.0);
    EXPECT_LT(w, prev);
    prev = w;
  }
}

TEST(Rbf, NonPositiveSigmaThrows) {
  EXPECT_THROW(sclub::rbf_weight(v2(0, 0), v2(1, 0), 0.0), std::invalid_argument);
  EXPECT_THROW(sclub::rbf_weight(v2(0, 0), v2(1, 0), -1.0), std::invalid_argument);
}
