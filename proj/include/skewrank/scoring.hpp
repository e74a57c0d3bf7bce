// Score extraction and ranking. For a completed matrix X the score
// vector is s = (1/n) X e, computed from the factors without forming X.
// When X is skew-symmetric this s is simultaneously centered and the
// least-squares minimizer of ||X - (s e^T - e s^T)||_F.
#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "skewrank/svp.hpp"
#include "skewrank/types.hpp"

namespace skewrank {

template <typename Scalar>
ScoreVector<Scalar> extract_scores(const LowRankFactors<Scalar>& factors) {
  const Index n = factors.rows();
  ScoreVector<Scalar> s;
  // (1/n) U diag(S) (V^T e), factor by factor.
  VectorX<Scalar> vte = factors.V.colwise().sum();
  s.values = factors.U * (factors.S.asDiagonal() * vte) / Scalar(n);
  const Scalar scale = std::max(Scalar(1), factors.frobenius_norm());
  s.centered = factors.skew_defect() <= Scalar(1e-10) * scale;
  return s;
}

// ||v - b|| / ||b|| with v_l = s_r - s_c over the sampled pairs; the
// score-based counterpart of the solver residual on the same sample set.
template <typename Scalar>
Residual<Scalar> score_residual(const SampleSet<Scalar>& samples,
                                const ScoreVector<Scalar>& s) {
  if (s.size() != samples.num_items) {
    throw DomainError("score vector length does not match sample set");
  }
  Scalar num2 = 0;
  for (Index l = 0; l < samples.size(); ++l) {
    const auto [r, c] = samples.pairs[static_cast<std::size_t>(l)];
    const Scalar d = s.values[r] - s.values[c] - samples.values[l];
    num2 += d * d;
  }
  const Scalar num = std::sqrt(num2);
  const Scalar norm_b = samples.values.norm();
  if (norm_b > Scalar(0)) return {num / norm_b, true};
  return {num, false};
}

// Descending sort by score; ties broken by ascending original index.
template <typename Scalar>
RankedList<Scalar> rank_items(const ScoreVector<Scalar>& s,
                              const std::vector<std::string>& ids = {}) {
  if (!ids.empty() && static_cast<Index>(ids.size()) != s.size()) {
    throw DomainError("id list length does not match score vector");
  }
  std::vector<Index> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (s.values[a] != s.values[b]) return s.values[a] > s.values[b];
    return a < b;
  });
  RankedList<Scalar> out;
  out.reserve(order.size());
  for (Index item : order) {
    out.push_back({item,
                   ids.empty() ? std::to_string(item)
                               : ids[static_cast<std::size_t>(item)],
                   s.values[item]});
  }
  return out;
}

// Affine rescale to [0, 1] for display; never feeds back into computation.
template <typename Scalar>
VectorX<Scalar> display_normalized(const ScoreVector<Scalar>& s) {
  if (s.size() == 0) return s.values;
  const Scalar lo = s.values.minCoeff();
  const Scalar hi = s.values.maxCoeff();
  if (hi == lo) return VectorX<Scalar>::Zero(s.size());
  return ((s.values.array() - lo) / (hi - lo)).matrix();
}

}  // namespace skewrank
