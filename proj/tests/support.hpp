// Shared test helpers: random skew-symmetric generators with known
// spectra, independent oracles, and sample-set builders.
#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <random>
#include <vector>

#include "skewrank/types.hpp"

namespace testsupport {

using skewrank::Index;
using skewrank::IndexPair;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd M(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) M(r, c) = normal(rng);
  }
  return M;
}

inline MatrixXd random_orthogonal(Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<MatrixXd> qr(random_gaussian(n, n, seed));
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

// General random skew-symmetric matrix.
inline MatrixXd random_skew(Index n, std::uint64_t seed) {
  const MatrixXd B = random_gaussian(n, n, seed);
  return (B - B.transpose()) / 2;
}

// Skew-symmetric matrix with prescribed singular-value pairs: a rotation
// of a block-diagonal of 2x2 blocks [[0, l], [-l, 0]]. Its singular
// values are each lambda twice (plus a zero when n is odd).
inline MatrixXd skew_with_spectrum(Index n, const std::vector<double>& lambdas,
                                   std::uint64_t seed) {
  MatrixXd T = MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < lambdas.size(); ++b) {
    const Index r = 2 * static_cast<Index>(b);
    if (r + 1 >= n) throw std::invalid_argument("too many blocks");
    T(r, r + 1) = lambdas[b];
    T(r + 1, r) = -lambdas[b];
  }
  const MatrixXd Q = random_orthogonal(n, seed);
  return Q * T * Q.transpose();
}

// Random rank-2 skew matrix u v^T - v u^T, generally not of the
// score-difference form.
inline MatrixXd random_rank2_skew(Index n, std::uint64_t seed) {
  const MatrixXd G = random_gaussian(n, 2, seed);
  return G.col(0) * G.col(1).transpose() - G.col(1) * G.col(0).transpose();
}

// Score-difference matrix s e^T - e s^T.
inline MatrixXd score_difference_matrix(const VectorXd& s) {
  const Index n = s.size();
  return s * Eigen::RowVectorXd::Ones(n) - VectorXd::Ones(n) * s.transpose();
}

// All off-diagonal entries of a dense skew matrix as a skew-closed
// sample set.
inline skewrank::SampleSet<double> full_observation(const MatrixXd& Y) {
  const Index n = Y.rows();
  std::vector<IndexPair> upper;
  std::vector<double> values;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      upper.emplace_back(i, j);
      values.push_back(Y(i, j));
    }
  }
  skewrank::VectorX<double> b =
      Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
  return skewrank::SampleSet<double>::from_upper(n, upper, b);
}

// Independent dense-SVD oracle (one-sided Jacobi, a different algorithm
// from the production BDCSVD/Lanczos paths).
inline VectorXd jacobi_singular_values(const MatrixXd& A) {
  Eigen::JacobiSVD<MatrixXd> svd(A);
  return svd.singularValues();
}

// Brute-force least-squares oracle for argmin_s ||X - (s e^T - e s^T)||_F
// with s^T e = 0: builds the full n^2-by-n design matrix, solves by QR,
// and centers the result.
inline VectorXd brute_force_ls_scores(const MatrixXd& X) {
  const Index n = X.rows();
  MatrixXd A = MatrixXd::Zero(n * n, n);
  VectorXd rhs(n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index row = i * n + j;
      A(row, i) += 1;
      A(row, j) -= 1;
      rhs[row] = X(i, j);
    }
  }
  VectorXd s = A.colPivHouseholderQr().solve(rhs);
  return s.array() - s.mean();
}

}  // namespace testsupport
