// Truncated SVD of sparse matrices and of low-rank-plus-sparse updates.
//
// Two backends sit behind one contract: every returned triplet satisfies
// ||A v_i - s_i u_i|| <= residual_tol * s_1, factors have orthonormal
// columns, and singular values are nonincreasing with zero padding when
// the requested rank exceeds the matrix rank.
//   - dense:   materialize and run BDCSVD (n <= dense_crossover)
//   - lanczos: Golub-Kahan bidiagonalization with full reorthogonalization
//              and explicit deflation so repeated singular values (the
//              norm for skew-symmetric inputs) are recovered with their
//              multiplicity.
#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "skewrank/types.hpp"

namespace skewrank {

template <typename Scalar>
struct SvdOptions {
  Index dense_crossover = 400;  // n <= this materializes and uses BDCSVD
  Scalar residual_tol = Scalar(1e-8);  // relative to the largest singular value
  Index max_steps = 300;               // bidiagonalization steps per run
  bool allow_dense_fallback = true;    // densify if the iteration stalls
  std::uint64_t start_seed = 0x5eed;   // deterministic start vectors
};

using SvdOptionsd = SvdOptions<double>;

// Nearest skew-symmetric matrix in any unitarily invariant norm.
template <typename Derived>
typename Derived::PlainObject closest_skew(const Eigen::MatrixBase<Derived>& B) {
  if (B.rows() != B.cols()) {
    throw DomainError("closest_skew requires a square matrix");
  }
  return ((B.derived() - B.derived().transpose()) / 2).eval();
}

namespace detail {

template <typename Scalar>
struct TruncatedSvd {
  LowRankFactors<Scalar> factors;
  Scalar tail;  // (k+1)-th singular value, 0 when rank <= k
};

// Matrix-free view of  base + sum_l corr[l] e_{r_l} e_{c_l}^T  where base
// is an optional low-rank factorization.
template <typename Scalar>
class SparsePlusLowRank {
 public:
  SparsePlusLowRank(Index n, const LowRankFactors<Scalar>* base,
                    std::span<const IndexPair> pairs,
                    const VectorX<Scalar>& corr)
      : n_(n), base_(base), pairs_(pairs), corr_(corr) {
    if (base_ && base_->rank() == 0) base_ = nullptr;
  }

  Index rows() const { return n_; }

  void apply(const VectorX<Scalar>& x, VectorX<Scalar>& y) const {
    if (base_) {
      y.noalias() = base_->U * (base_->S.asDiagonal() * (base_->V.transpose() * x));
    } else {
      y.setZero(n_);
    }
    for (std::size_t l = 0; l < pairs_.size(); ++l) {
      y[pairs_[l].first] += corr_[static_cast<Index>(l)] * x[pairs_[l].second];
    }
  }

  void apply_transpose(const VectorX<Scalar>& x, VectorX<Scalar>& y) const {
    if (base_) {
      y.noalias() = base_->V * (base_->S.asDiagonal() * (base_->U.transpose() * x));
    } else {
      y.setZero(n_);
    }
    for (std::size_t l = 0; l < pairs_.size(); ++l) {
      y[pairs_[l].second] += corr_[static_cast<Index>(l)] * x[pairs_[l].first];
    }
  }

  MatrixX<Scalar> materialize() const {
    MatrixX<Scalar> M = base_ ? MatrixX<Scalar>(base_->matrix())
                              : MatrixX<Scalar>(MatrixX<Scalar>::Zero(n_, n_));
    for (std::size_t l = 0; l < pairs_.size(); ++l) {
      M(pairs_[l].first, pairs_[l].second) += corr_[static_cast<Index>(l)];
    }
    return M;
  }

 private:
  Index n_;
  const LowRankFactors<Scalar>* base_;
  std::span<const IndexPair> pairs_;
  const VectorX<Scalar>& corr_;
};

template <typename Scalar>
TruncatedSvd<Scalar> dense_truncated_svd(const MatrixX<Scalar>& M, Index k) {
  const Index n = M.rows();
  Eigen::BDCSVD<MatrixX<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd<Scalar> out;
  out.factors.U = svd.matrixU().leftCols(k);
  out.factors.S = svd.singularValues().head(k);
  out.factors.V = svd.matrixV().leftCols(k);
  out.tail = k < n ? svd.singularValues()[k] : Scalar(0);
  return out;
}

// Removes the components of v along the first `cols` columns of B, twice.
template <typename Scalar>
void reorthogonalize(const MatrixX<Scalar>& B, Index cols, VectorX<Scalar>& v) {
  if (cols == 0) return;
  auto basis = B.leftCols(cols);
  for (int pass = 0; pass < 2; ++pass) {
    v.noalias() -= basis * (basis.transpose() * v);
  }
}

template <typename Scalar>
bool random_unit_orthogonal(std::mt19937_64& rng, const MatrixX<Scalar>& basis,
                            Index basis_cols, VectorX<Scalar>& v) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = basis.rows();
  for (int attempt = 0; attempt < 8; ++attempt) {
    v.resize(n);
    for (Index i = 0; i < n; ++i) v[i] = Scalar(normal(rng));
    reorthogonalize(basis, basis_cols, v);
    const Scalar norm = v.norm();
    if (norm > Scalar(1e-6) * std::sqrt(Scalar(n))) {
      v /= norm;
      return true;
    }
  }
  return false;
}

// Golub-Kahan bidiagonalization with full reorthogonalization. Each run
// works in the orthogonal complement of the already-harvested singular
// vectors, so restarts pick up the remaining copies of repeated values.
template <typename Scalar>
TruncatedSvd<Scalar> lanczos_truncated_svd(const SparsePlusLowRank<Scalar>& op,
                                           Index k,
                                           const SvdOptions<Scalar>& opts) {
  const Index n = op.rows();
  const Index want = std::min(k + 1, n);
  const Index pool_cap = std::min(n, 3 * want + 16);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  MatrixX<Scalar> CU(n, pool_cap), CV(n, pool_cap);  // harvested triplets
  std::vector<Scalar> csig;
  std::mt19937_64 rng(opts.start_seed);
  Scalar sigma_scale = Scalar(0);
  int kernel_strikes = 0;
  // Remaining spectrum is known to be numerically zero (padding is exact).
  bool spectrum_exhausted = false;
  // The deflated complement holds nothing larger than the want-th best
  // harvested value, so the pool provably contains the top `want` set.
  // A single run can deliver only one Ritz vector per distinct singular
  // value; this certificate is what forces the restarts that pick up the
  // remaining copies of repeated values.
  bool certified = false;
  const int max_runs = 2 * static_cast<int>(want) + 6;

  for (int run = 0; run < max_runs && !certified; ++run) {
    const Index collected = static_cast<Index>(csig.size());
    if (collected >= pool_cap) break;
    const Index cap = std::min(n - collected, opts.max_steps);
    if (cap <= 0) {
      spectrum_exhausted = true;
      break;
    }

    MatrixX<Scalar> Vb(n, cap + 1), Ub(n, cap);
    VectorX<Scalar> alpha(cap), beta(cap);
    VectorX<Scalar> v(n), p(n), r(n);

    if (!random_unit_orthogonal(rng, CV, collected, v)) {
      spectrum_exhausted = true;
      break;
    }
    Vb.col(0) = v;
    op.apply(v, p);
    reorthogonalize(CU, collected, p);
    alpha[0] = p.norm();
    const Scalar brk = Scalar(64) * eps * std::max(sigma_scale, alpha[0]);
    if (alpha[0] <= brk) {
      // Start vector (numerically) annihilated: the remaining spectrum in
      // the deflated complement looks like zero. Two strikes confirm it.
      if (++kernel_strikes >= 2) {
        spectrum_exhausted = true;
        break;
      }
      continue;
    }
    kernel_strikes = 0;
    Ub.col(0) = p / alpha[0];
    sigma_scale = std::max(sigma_scale, alpha[0]);

    Index steps = 1;          // completed alpha entries
    bool beta_break = false;  // row space exhausted
    bool alpha_break = false; // column space exhausted
    Index converged = 0;
    Eigen::BDCSVD<MatrixX<Scalar>> bsvd;

    while (true) {
      const Index j = steps - 1;
      op.apply_transpose(Ub.col(j), r);
      reorthogonalize(CV, collected, r);
      r.noalias() -= alpha[j] * Vb.col(j);
      reorthogonalize(Vb, steps, r);
      beta[j] = r.norm();
      sigma_scale = std::max(sigma_scale, beta[j]);
      if (beta[j] <= Scalar(64) * eps * sigma_scale) {
        beta_break = true;
        break;
      }
      Vb.col(j + 1) = r / beta[j];

      // Convergence checkpoint: Ritz residuals for B_j are beta_j times
      // the last entries of the left singular vectors.
      const bool at_cap = steps == cap;
      if (!at_cap && steps >= want && steps % 4 == 0) {
        MatrixX<Scalar> B = MatrixX<Scalar>::Zero(steps, steps);
        for (Index q = 0; q < steps; ++q) {
          B(q, q) = alpha[q];
          if (q + 1 < steps) B(q, q + 1) = beta[q];
        }
        bsvd.compute(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Scalar top = std::max(sigma_scale, bsvd.singularValues()[0]);
        converged = 0;
        for (Index q = 0; q < steps; ++q) {
          if (beta[j] * std::abs(bsvd.matrixU()(steps - 1, q)) <=
              opts.residual_tol * top * Scalar(0.25)) {
            ++converged;
          }
        }
        if (converged >= want) break;
      }
      if (at_cap) break;

      op.apply(Vb.col(j + 1), p);
      reorthogonalize(CU, collected, p);
      p.noalias() -= beta[j] * Ub.col(j);
      reorthogonalize(Ub, steps, p);
      alpha[steps] = p.norm();
      sigma_scale = std::max(sigma_scale, alpha[steps]);
      if (alpha[steps] <= Scalar(64) * eps * sigma_scale) {
        alpha_break = true;
        break;
      }
      Ub.col(steps) = p / alpha[steps];
      ++steps;
    }

    // Assemble the (possibly rectangular) bidiagonal block and take its
    // SVD. On either breakdown all Ritz triplets are exact.
    MatrixX<Scalar> B = MatrixX<Scalar>::Zero(steps, alpha_break ? steps + 1 : steps);
    for (Index q = 0; q < steps; ++q) {
      B(q, q) = alpha[q];
      if (q + 1 < steps) B(q, q + 1) = beta[q];
    }
    if (alpha_break) B(steps - 1, steps) = beta[steps - 1];
    bsvd.compute(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index nritz = std::min(B.rows(), B.cols());
    const Scalar top = std::max(sigma_scale, bsvd.singularValues()[0]);
    const Scalar last_beta = beta_break ? Scalar(0) : beta[steps - 1];

    Scalar run_best = Scalar(-1);  // largest converged Ritz value this run
    for (Index q = 0; q < nritz; ++q) {
      const Scalar sigma = bsvd.singularValues()[q];
      const Scalar resid = alpha_break || beta_break
                               ? Scalar(0)
                               : last_beta * std::abs(bsvd.matrixU()(steps - 1, q));
      if (resid > opts.residual_tol * top * Scalar(0.25)) continue;
      run_best = std::max(run_best, sigma);
      if (sigma <= Scalar(32) * eps * top) continue;  // kernel direction
      if (static_cast<Index>(csig.size()) >= pool_cap) break;
      const Index c = static_cast<Index>(csig.size());
      CU.col(c) = Ub.leftCols(steps) * bsvd.matrixU().col(q);
      CV.col(c) = (alpha_break ? Vb.leftCols(steps + 1) : Vb.leftCols(steps)) *
                  bsvd.matrixV().col(q);
      csig.push_back(sigma);
    }

    if (static_cast<Index>(csig.size()) >= want && run_best >= Scalar(0)) {
      std::vector<Scalar> sorted = csig;
      std::nth_element(sorted.begin(), sorted.begin() + (want - 1),
                       sorted.end(), std::greater<Scalar>());
      const Scalar kth = sorted[static_cast<std::size_t>(want - 1)];
      if (run_best <= kth + opts.residual_tol * sigma_scale) certified = true;
    }
  }

  // Order what was harvested and verify the contract explicitly.
  const Index found = static_cast<Index>(csig.size());
  std::vector<Index> order(found);
  for (Index q = 0; q < found; ++q) order[q] = q;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return csig[a] > csig[b]; });

  TruncatedSvd<Scalar> out;
  out.factors.U.resize(n, k);
  out.factors.S = VectorX<Scalar>::Zero(k);
  out.factors.V.resize(n, k);
  const Index kept = std::min(found, k);
  for (Index q = 0; q < kept; ++q) {
    out.factors.U.col(q) = CU.col(order[q]);
    out.factors.S[q] = csig[order[q]];
    out.factors.V.col(q) = CV.col(order[q]);
  }
  out.tail = found > k ? csig[order[k]] : Scalar(0);

  bool ok = found >= std::min(want, n) || spectrum_exhausted;
  const Scalar sigma1 = kept > 0 ? out.factors.S[0] : Scalar(0);
  VectorX<Scalar> t1(n), t2(n);
  for (Index q = 0; ok && q < kept; ++q) {
    op.apply(out.factors.V.col(q), t1);
    t1 -= out.factors.S[q] * out.factors.U.col(q);
    op.apply_transpose(out.factors.U.col(q), t2);
    t2 -= out.factors.S[q] * out.factors.V.col(q);
    const Scalar bound = opts.residual_tol * std::max(sigma1, sigma_scale);
    if (t1.norm() > bound || t2.norm() > bound) ok = false;
  }
  if (!ok) {
    if (opts.allow_dense_fallback && n <= 4096) {
      return dense_truncated_svd(op.materialize(), k);
    }
    throw std::runtime_error("truncated SVD iteration did not converge");
  }

  // Pad missing directions with an orthonormal complement.
  if (kept < k) {
    MatrixX<Scalar> baseU(n, k), baseV(n, k);
    baseU.leftCols(kept) = out.factors.U.leftCols(kept);
    baseV.leftCols(kept) = out.factors.V.leftCols(kept);
    VectorX<Scalar> w(n);
    for (Index q = kept; q < k; ++q) {
      if (!random_unit_orthogonal(rng, baseU, q, w)) {
        throw std::runtime_error("cannot pad orthonormal factors");
      }
      baseU.col(q) = w;
      out.factors.U.col(q) = w;
      if (!random_unit_orthogonal(rng, baseV, q, w)) {
        throw std::runtime_error("cannot pad orthonormal factors");
      }
      baseV.col(q) = w;
      out.factors.V.col(q) = w;
    }
  }
  return out;
}

template <typename Scalar>
TruncatedSvd<Scalar> truncated_svd(Index n, const LowRankFactors<Scalar>* base,
                                   std::span<const IndexPair> pairs,
                                   const VectorX<Scalar>& corr, Index k,
                                   const SvdOptions<Scalar>& opts) {
  if (n < 1) throw DomainError("matrix dimension must be positive");
  if (k < 0 || k > n) {
    throw DomainError("truncation rank must satisfy 0 <= k <= n");
  }
  if (static_cast<Index>(pairs.size()) != corr.size()) {
    throw DomainError("pairs/values size mismatch");
  }
  SparsePlusLowRank<Scalar> op(n, base, pairs, corr);
  if (n <= opts.dense_crossover) {
    return dense_truncated_svd(op.materialize(), k);
  }
  return lanczos_truncated_svd(op, k, opts);
}

}  // namespace detail

// Top-k singular triplets of the sparse n x n matrix with the given
// nonzeros. When k exceeds the matrix rank, trailing singular values are
// zero and the factor columns are padded orthonormally.
template <typename Scalar>
LowRankFactors<Scalar> sparse_truncated_svd(Index n,
                                            std::span<const IndexPair> pairs,
                                            const VectorX<Scalar>& values,
                                            Index k,
                                            const SvdOptions<Scalar>& opts = {}) {
  return detail::truncated_svd<Scalar>(n, nullptr, pairs, values, k, opts)
      .factors;
}

}  // namespace skewrank
