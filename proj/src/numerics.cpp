#include "sclub/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sclub {

namespace {

void require_same_dim(Eigen::Index n, Eigen::Index m, const char* what) {
  if (n != m) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(n) + " vs " + std::to_string(m) + ")");
  }
}

void require_square(const Mat& m, const char* what) {
  require_same_dim(m.rows(), m.cols(), what);
}

// Flips each column so that its largest-magnitude entry (lowest index on ties) is positive.
void fix_signs(Mat& components) {
  for (Eigen::Index c = 0; c < components.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < components.rows(); ++r) {
      const double a = std::abs(components(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (components(best, c) < 0.0) components.col(c) *= -1.0;
  }
}

}  // namespace

Mat rank_one_update(const Mat& m, const Vec& x) {
  require_square(m, "rank_one_update");
  require_same_dim(m.rows(), x.size(), "rank_one_update");
  Mat out = m;
  out.noalias() += x * x.transpose();
  return out;
}

Vec solve_spd(const Mat& m, const Vec& b) {
  require_square(m, "solve_spd");
  require_same_dim(m.rows(), b.size(), "solve_spd");
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("solve_spd: matrix is not positive definite");
  }
  return llt.solve(b);
}

Mat inv_rank_one_update(const Mat& minv, const Vec& x) {
  require_square(minv, "inv_rank_one_update");
  require_same_dim(minv.rows(), x.size(), "inv_rank_one_update");
  const Vec mx = minv * x;
  const double denom = 1.0 + x.dot(mx);
  Mat out = minv;
  out.noalias() -= (mx * mx.transpose()) / denom;
  // Keep exact symmetry; the outer product above is symmetric up to rounding.
  return (out + out.transpose()) * 0.5;
}

PcaBasis pca_fit(const Mat& rows, int k) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index dim = rows.cols();
  if (k < 1) throw std::invalid_argument("pca_fit: k must be positive");
  if (k > dim) {
    throw std::invalid_argument("pca_fit: k=" + std::to_string(k) + " exceeds dimension " +
                                std::to_string(dim));
  }
  if (n < k) {
    throw std::invalid_argument("pca_fit: need at least k=" + std::to_string(k) + " rows, got " +
                                std::to_string(n));
  }

  PcaBasis basis;
  basis.mean = rows.colwise().mean().transpose();
  const Mat centred = rows.rowwise() - basis.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;

  // Work in whichever of the D x D covariance or the n x n Gram matrix is smaller.
  const bool use_gram = n < dim;
  const Mat small = use_gram ? Mat(centred * centred.transpose() / denom)
                             : Mat(centred.transpose() * centred / denom);
  Eigen::SelfAdjointEigenSolver<Mat> eig(small);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");

  const Vec& values = eig.eigenvalues();  // ascending
  const Eigen::Index m = values.size();
  const double top = values(m - 1);
  const double tol =
      std::max(top, 0.0) * static_cast<double>(std::max(n, dim)) * std::numeric_limits<double>::epsilon() * 16.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (values(i) > tol && values(i) > 0.0) ++rank;
  }
  if (k > rank) {
    throw RankDeficient("pca_fit: k=" + std::to_string(k) +
                            " exceeds the rank of the centred data; achievable rank is " + std::to_string(rank),
                        static_cast<long>(rank));
  }

  basis.components.resize(dim, k);
  basis.eigenvalues.resize(k);
  for (int c = 0; c < k; ++c) {
    const Eigen::Index src = m - 1 - c;
    basis.eigenvalues(c) = values(src);
    if (use_gram) {
      Vec dir = centred.transpose() * eig.eigenvectors().col(src);
      basis.components.col(c) = dir / dir.norm();
    } else {
      basis.components.col(c) = eig.eigenvectors().col(src);
    }
  }
  fix_signs(basis.components);
  return basis;
}

Mat pca_project(const PcaBasis& basis, const Mat& rows) {
  require_same_dim(rows.cols(), basis.mean.size(), "pca_project");
  return (rows.rowwise() - basis.mean.transpose()) * basis.components;
}

double rbf_weight(const Vec& u, const Vec& v, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf_weight: sigma must be positive");
  require_same_dim(u.size(), v.size(), "rbf_weight");
  return std::exp(-(u - v).squaredNorm() / (2.0 * sigma * sigma));
}

}  // namespace sclub
