// Fixed-rank completion of a sampled matrix by singular value projection:
// starting from X = 0, repeatedly take the rank-k truncated SVD of
//   X - eta * A*(A(X) - b)
// where A(.) reads the sampled entries. With a skew-closed sample set and
// even k every iterate stays skew-symmetric, which is what makes the
// solver usable for pairwise-comparison completion.
#pragma once

#include <functional>
#include <vector>

#include "skewrank/svd.hpp"
#include "skewrank/types.hpp"

namespace skewrank {

template <typename Scalar>
struct SolverConfig {
  Index target_rank = 2;          // must be even for skew problems
  Scalar step_length = 1;         // eta
  Scalar tolerance = Scalar(1e-4);  // on the residual relative to ||b||
  Index max_iterations = 500;
  SvdOptions<Scalar> svd;
};

using SolverConfigd = SolverConfig<double>;

template <typename Scalar>
struct SvpResult {
  LowRankFactors<Scalar> factors;
  // Relative residual of X^(0), X^(1), ...; always nonempty.
  std::vector<Scalar> residual_history;
  Index iterations = 0;  // projections performed
  bool converged = false;
  // Set when some projection had sigma_k ~ sigma_{k+1}: the truncation is
  // then not unique and skew-symmetry of the iterate is not guaranteed.
  bool gap_flag = false;
  // False only when ||b|| = 0 and residuals are absolute norms.
  bool residual_is_relative = true;

  Scalar final_residual() const { return residual_history.back(); }
};

// Called with each iterate (including X^(0)) and its residual.
template <typename Scalar>
using IterationObserver =
    std::function<void(Index iteration, const LowRankFactors<Scalar>& iterate,
                       Scalar residual)>;

// Values of the factored matrix at the sampled positions, i.e. A(X).
template <typename Scalar>
VectorX<Scalar> sample_values(const LowRankFactors<Scalar>& factors,
                              const std::vector<IndexPair>& pairs) {
  MatrixX<Scalar> US = factors.U * factors.S.asDiagonal();
  VectorX<Scalar> out(static_cast<Index>(pairs.size()));
  for (std::size_t l = 0; l < pairs.size(); ++l) {
    out[static_cast<Index>(l)] =
        US.row(pairs[l].first).dot(factors.V.row(pairs[l].second));
  }
  return out;
}

// Residual ||A(X) - b|| / ||b||; absolute when ||b|| = 0.
template <typename Scalar>
Residual<Scalar> sample_residual(const SampleSet<Scalar>& samples,
                                 const LowRankFactors<Scalar>& factors) {
  const Scalar norm_b = samples.values.norm();
  const Scalar num = (sample_values(factors, samples.pairs) - samples.values).norm();
  if (norm_b > Scalar(0)) return {num / norm_b, true};
  return {num, false};
}

template <typename Scalar>
SvpResult<Scalar> svp_complete(const SampleSet<Scalar>& samples,
                               const SolverConfig<Scalar>& config,
                               const IterationObserver<Scalar>& observer = {}) {
  if (config.target_rank < 2 || config.target_rank % 2 != 0) {
    throw DomainError("target rank must be even and >= 2");
  }
  if (config.target_rank > samples.num_items) {
    throw DomainError("target rank exceeds the matrix dimension");
  }
  if (!(config.step_length > Scalar(0))) {
    throw DomainError("step length must be positive");
  }
  if (!(config.tolerance > Scalar(0))) {
    throw DomainError("tolerance must be positive");
  }
  if (config.max_iterations < 0) {
    throw DomainError("max_iterations must be nonnegative");
  }
  if (samples.empty()) {
    throw DomainError("sample set is empty; nothing to complete");
  }
  samples.validate();

  const Index n = samples.num_items;
  const Index k = config.target_rank;
  const Scalar norm_b = samples.values.norm();

  SvpResult<Scalar> result;
  result.residual_is_relative = norm_b > Scalar(0);
  result.factors = LowRankFactors<Scalar>::Zero(n, k);
  VectorX<Scalar> on_samples = VectorX<Scalar>::Zero(samples.size());

  for (Index t = 0;; ++t) {
    const Scalar residual = (on_samples - samples.values).norm() /
                            (result.residual_is_relative ? norm_b : Scalar(1));
    result.residual_history.push_back(residual);
    if (observer) observer(t, result.factors, residual);
    if (residual <= config.tolerance) {
      result.converged = true;
      break;
    }
    if (t >= config.max_iterations) break;

    // M = X + eta * A*(b - A(X)); project onto rank k.
    VectorX<Scalar> correction =
        config.step_length * (samples.values - on_samples);
    auto projected = detail::truncated_svd<Scalar>(
        n, &result.factors, samples.pairs, correction, k, config.svd);
    if (projected.tail > Scalar(0) &&
        projected.factors.S[k - 1] <= projected.tail * (1 + Scalar(1e-6))) {
      result.gap_flag = true;
    }
    result.factors = std::move(projected.factors);
    result.iterations = t + 1;
    on_samples = sample_values(result.factors, samples.pairs);
  }
  return result;
}

}  // namespace skewrank
