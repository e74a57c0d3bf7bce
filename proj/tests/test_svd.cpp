#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skewrank/svd.hpp"
#include "support.hpp"

using namespace skewrank;
using testsupport::MatrixXd;
using testsupport::VectorXd;

namespace {

// Sparse view of every nonzero of a dense matrix.
std::pair<std::vector<IndexPair>, VectorX<double>> sparsify(const MatrixXd& A) {
  std::vector<IndexPair> pairs;
  std::vector<double> values;
  for (Index r = 0; r < A.rows(); ++r) {
    for (Index c = 0; c < A.cols(); ++c) {
      if (A(r, c) != 0.0) {
        pairs.emplace_back(r, c);
        values.push_back(A(r, c));
      }
    }
  }
  VectorX<double> v = Eigen::Map<const VectorXd>(
      values.data(), static_cast<Index>(values.size()));
  return {std::move(pairs), std::move(v)};
}

LowRankFactors<double> svd_of(const MatrixXd& A, Index k,
                              const SvdOptions<double>& opts = {}) {
  auto [pairs, values] = sparsify(A);
  return sparse_truncated_svd<double>(A.rows(), pairs, values, k, opts);
}

SvdOptions<double> lanczos_only() {
  SvdOptions<double> opts;
  opts.dense_crossover = 0;
  opts.allow_dense_fallback = false;
  return opts;
}

double orthonormality_defect(const MatrixXd& Q) {
  return (Q.transpose() * Q - MatrixXd::Identity(Q.cols(), Q.cols())).norm();
}

void check_factor_contract(const MatrixXd& A, const LowRankFactors<double>& f) {
  CHECK(orthonormality_defect(f.U) <= 1e-10);
  CHECK(orthonormality_defect(f.V) <= 1e-10);
  for (Index q = 0; q + 1 < f.rank(); ++q) CHECK(f.S[q] >= f.S[q + 1]);
  CHECK(f.S.minCoeff() >= 0.0);
  const double sigma1 = f.S.size() > 0 ? f.S[0] : 0.0;
  for (Index q = 0; q < f.rank(); ++q) {
    CHECK((A * f.V.col(q) - f.S[q] * f.U.col(q)).norm() <=
          1e-8 * std::max(sigma1, 1e-12));
  }
}

}  // namespace

TEST_CASE("closest skew matrix") {
  MatrixXd B(2, 2);
  B << 1, 2, 0, 1;
  MatrixXd A = closest_skew(B);
  CHECK(A(0, 0) == 0.0);
  CHECK(A(0, 1) == 1.0);
  CHECK(A(1, 0) == -1.0);
  CHECK(A(1, 1) == 0.0);

  const MatrixXd S = testsupport::random_skew(7, 321);
  CHECK((closest_skew(S) - S).norm() == 0.0);  // already skew

  const MatrixXd sym = B + B.transpose();
  CHECK(closest_skew(sym).norm() == 0.0);  // symmetric part annihilated

  CHECK_THROWS_AS(closest_skew(MatrixXd::Zero(2, 3)), DomainError);
}

TEST_CASE("2x2 rotation block has unit singular pair") {
  MatrixXd A(2, 2);
  A << 0, 1, -1, 0;
  const auto f = svd_of(A, 2);
  CHECK(f.S[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.S[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((f.matrix() - A).norm() <= 1e-12);
}

TEST_CASE("score-difference matrix has paired sqrt(n s.s) values") {
  VectorXd s(3);
  s << 1, 2, 3;
  const MatrixXd Y = testsupport::score_difference_matrix(s);
  const auto f = svd_of(Y, 2);
  // Centered scores (-1, 0, 1): both singular values are sqrt(3 * 2).
  const double expected = std::sqrt(6.0);
  CHECK(f.S[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(f.S[1] == doctest::Approx(expected).epsilon(1e-12));
  CHECK((f.matrix() - Y).norm() <= 1e-10);
  // Cross-check against the independent dense oracle.
  const VectorXd oracle = testsupport::jacobi_singular_values(Y);
  CHECK(f.S[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
}

TEST_CASE("prescribed spectrum is recovered with multiplicity two") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    const MatrixXd A = testsupport::skew_with_spectrum(9, {4.0, 1.5}, seed);
    const auto f = svd_of(A, 4);
    CHECK(f.S[0] == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(f.S[1] == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(f.S[2] == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(f.S[3] == doctest::Approx(1.5).epsilon(1e-10));
    check_factor_contract(A, f);
  }
}

TEST_CASE("rank overshoot pads with zeros and orthonormal columns") {
  const MatrixXd A = testsupport::random_rank2_skew(8, 17);
  const auto f = svd_of(A, 6);
  CHECK(f.S[0] > 0);
  CHECK(f.S[1] > 0);
  for (Index q = 2; q < 6; ++q) {
    CHECK(f.S[q] <= 1e-10 * f.S[0]);
  }
  CHECK(orthonormality_defect(f.U) <= 1e-10);
  CHECK(orthonormality_defect(f.V) <= 1e-10);
  CHECK((f.matrix() - A).norm() <= 1e-10 * A.norm());
}

TEST_CASE("zero matrix yields zero values and orthonormal padding") {
  std::vector<IndexPair> pairs;
  VectorX<double> values(0);
  for (auto opts : {SvdOptions<double>{}, lanczos_only()}) {
    const auto f = sparse_truncated_svd<double>(5, pairs, values, 3, opts);
    CHECK(f.S.norm() == 0.0);
    CHECK(orthonormality_defect(f.U) <= 1e-12);
    CHECK(orthonormality_defect(f.V) <= 1e-12);
  }
}

TEST_CASE("paired spectrum of random skew matrices against the oracle") {
  // Random skew matrices, several sizes; whenever the oracle shows a gap
  // at even k, the truncated values must match it and pair up to 1e-8.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Index n = 6 + static_cast<Index>(seed % 45);
    const MatrixXd A = testsupport::random_skew(n, 1000 + seed);
    const VectorXd oracle = testsupport::jacobi_singular_values(A);
    for (Index k : {2, 4}) {
      if (k >= n) continue;
      if (!(oracle[k - 1] > oracle[k] * (1 + 1e-6))) continue;
      const auto f = svd_of(A, k);
      for (Index q = 0; q < k; ++q) {
        CHECK(f.S[q] == doctest::Approx(oracle[q]).epsilon(1e-8));
      }
      for (Index q = 0; q + 1 < k; q += 2) {
        CHECK(std::abs(f.S[q] - f.S[q + 1]) <= 1e-8 * f.S[q]);
      }
    }
  }
}

TEST_CASE("rank-k truncation of a gapped skew matrix is skew") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 8 + static_cast<Index>(seed % 20);
    // Spectrum with a solid gap after the second pair.
    const MatrixXd A =
        testsupport::skew_with_spectrum(n, {3.0, 2.0, 0.7, 0.3}, 50 + seed);
    const auto f = svd_of(A, 4);
    const MatrixXd X = f.matrix();
    CHECK((X + X.transpose()).norm() <= 1e-10 * std::max(1.0, X.norm()));
  }
}

TEST_CASE("lanczos path matches the dense oracle on random sparse matrices") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 25 + static_cast<Index>(seed * 7);
    MatrixXd A = testsupport::random_gaussian(n, n, 400 + seed);
    // Keep it sparse: zero out most entries.
    std::mt19937_64 rng(9000 + seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) {
        if (uni(rng) > 0.15) A(r, c) = 0.0;
      }
    }
    const VectorXd oracle = testsupport::jacobi_singular_values(A);
    for (Index k : {1, 3}) {
      const auto f = svd_of(A, k, lanczos_only());
      for (Index q = 0; q < k; ++q) {
        CHECK(f.S[q] == doctest::Approx(oracle[q]).epsilon(1e-8));
      }
      check_factor_contract(A, f);
    }
  }
}

TEST_CASE("lanczos path recovers repeated values with their multiplicity") {
  // The deflated restarts must find the second copy of each pair.
  for (std::uint64_t seed : {71u, 72u, 73u, 74u}) {
    const Index n = 40;
    const MatrixXd A =
        testsupport::skew_with_spectrum(n, {5.0, 2.5, 1.0}, seed);
    const auto f = svd_of(A, 4, lanczos_only());
    CHECK(f.S[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(f.S[1] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(f.S[2] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(f.S[3] == doctest::Approx(2.5).epsilon(1e-9));
    check_factor_contract(A, f);
  }
}

TEST_CASE("lanczos path on a moderately large sparse skew matrix") {
  const Index n = 500;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<IndexPair> pairs;
  std::vector<double> values;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (uni(rng) < 0.02) {
        const double v = normal(rng);
        pairs.emplace_back(i, j);
        values.push_back(v);
        pairs.emplace_back(j, i);
        values.push_back(-v);
      }
    }
  }
  VectorX<double> b = Eigen::Map<const VectorXd>(
      values.data(), static_cast<Index>(values.size()));
  const auto f = sparse_truncated_svd<double>(n, pairs, b, 2, lanczos_only());
  // Compare with a dense decomposition of the same matrix.
  MatrixXd A = MatrixXd::Zero(n, n);
  for (std::size_t l = 0; l < pairs.size(); ++l) {
    A(pairs[l].first, pairs[l].second) += values[l];
  }
  const VectorXd oracle = testsupport::jacobi_singular_values(A);
  CHECK(f.S[0] == doctest::Approx(oracle[0]).epsilon(1e-8));
  CHECK(f.S[1] == doctest::Approx(oracle[1]).epsilon(1e-8));
  check_factor_contract(A, f);
}

TEST_CASE("low-rank plus sparse update matches the materialized SVD") {
  for (std::uint64_t seed : {81u, 82u}) {
    const Index n = 30;
    const MatrixXd base_dense = testsupport::random_rank2_skew(n, seed);
    const auto base = svd_of(base_dense, 2);
    // A sparse skew correction on a few pairs.
    std::mt19937_64 rng(seed + 99);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<IndexPair> pairs;
    std::vector<double> values;
    for (Index i = 0; i < 10; ++i) {
      const double v = normal(rng);
      pairs.emplace_back(i, i + 5);
      values.push_back(v);
      pairs.emplace_back(i + 5, i);
      values.push_back(-v);
    }
    VectorX<double> corr = Eigen::Map<const VectorXd>(
        values.data(), static_cast<Index>(values.size()));

    for (auto opts : {SvdOptions<double>{}, lanczos_only()}) {
      const auto got =
          detail::truncated_svd<double>(n, &base, pairs, corr, 4, opts);
      MatrixXd M = base.matrix();
      for (std::size_t l = 0; l < pairs.size(); ++l) {
        M(pairs[l].first, pairs[l].second) += corr[static_cast<Index>(l)];
      }
      const VectorXd oracle = testsupport::jacobi_singular_values(M);
      for (Index q = 0; q < 4; ++q) {
        CHECK(got.factors.S[q] == doctest::Approx(oracle[q]).epsilon(1e-8));
      }
      CHECK(got.tail == doctest::Approx(oracle[4]).epsilon(1e-6));
    }
  }
}

TEST_CASE("rank bounds are validated") {
  std::vector<IndexPair> pairs{{0, 1}};
  VectorX<double> values(1);
  values << 1.0;
  CHECK_THROWS_AS(sparse_truncated_svd<double>(2, pairs, values, 3),
                  DomainError);
  CHECK_NOTHROW(sparse_truncated_svd<double>(2, pairs, values, 2));
}
