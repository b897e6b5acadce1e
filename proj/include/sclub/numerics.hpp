#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sclub {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
/// Row-per-vector storage for catalogs and user tables.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when a matrix that must be symmetric positive definite fails to factor.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by pca_fit when fewer than k components carry variance.
class RankDeficient : public std::invalid_argument {
 public:
  RankDeficient(const std::string& what, long achievable_rank)
      : std::invalid_argument(what), achievable_rank_(achievable_rank) {}
  long achievable_rank() const { return achievable_rank_; }

 private:
  long achievable_rank_;
};

/// Returns m + x x^T.
Mat rank_one_update(const Mat& m, const Vec& x);

/// Solves m u = b for symmetric positive definite m (Cholesky).
Vec solve_spd(const Mat& m, const Vec& b);

/// Sherman-Morrison: given minv = m^-1, returns (m + x x^T)^-1.
Mat inv_rank_one_update(const Mat& minv, const Vec& x);

/// Leading principal components of a row-sample matrix.
struct PcaBasis {
  Mat components;  // D x k, one orthonormal component per column
  Vec eigenvalues; // k, non-increasing
  Vec mean;        // D
};

/// Fits the k leading eigenvectors of the mean-centred sample covariance.
/// Each component is signed so its largest-magnitude entry is positive.
PcaBasis pca_fit(const Mat& rows, int k);

/// Projects rows (n x D) onto the basis after centring: returns n x k.
Mat pca_project(const PcaBasis& basis, const Mat& rows);

/// exp(-|u - v|^2 / (2 sigma^2)).
double rbf_weight(const Vec& u, const Vec& v, double sigma);

}  // namespace sclub
