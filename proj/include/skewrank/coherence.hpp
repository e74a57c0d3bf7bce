// Recoverability diagnostics for a centered score vector s. Two
// dimensionless measures control how many random samples the completion
// needs:
//   theta = max_i s_i^2 / (s^T s)            (leverage of the largest score)
//   rho   = (max_i s_i - min_i s_i) / ||s||  (spread relative to the norm)
// Their combination nu = max((n theta + 1)/4, n rho^2) is the coherence
// of the induced pairwise-difference matrix with respect to an operator
// basis of symmetric, skew-symmetric and diagonal elements, and
//   2 n nu (1 + beta) (log n)^2
// samples suffice for exact recovery with probability ~ 1 - n^(-beta)
// (natural logarithm; constants reported as written, no hidden factors).
// Both theta and rho are scale-free, so the report is invariant under
// s -> gamma s.
#pragma once

#include <cmath>

#include "skewrank/types.hpp"

namespace skewrank {

template <typename Scalar>
struct CoherenceReport {
  Index n = 0;
  Scalar theta = 0;
  Scalar rho = 0;
  Scalar nu = 0;
  Scalar beta = 0;          // confidence parameter (input)
  Scalar sample_bound = 0;  // 2 n nu (1 + beta) (log n)^2
};

using CoherenceReportd = CoherenceReport<double>;

template <typename Scalar>
CoherenceReport<Scalar> coherence(const ScoreVector<Scalar>& s, Scalar beta) {
  const Index n = s.size();
  if (n < 2) throw DomainError("coherence requires at least two scores");
  if (!(beta > Scalar(0))) throw DomainError("beta must be positive");
  const Scalar norm2 = s.values.squaredNorm();
  if (norm2 == Scalar(0)) {
    throw DomainError("coherence is undefined for the zero score vector");
  }
  const Scalar max_abs = s.values.cwiseAbs().maxCoeff();
  if (std::abs(s.values.sum()) > Scalar(1e-10) * Scalar(n) * max_abs) {
    throw DomainError("coherence requires a centered score vector");
  }

  CoherenceReport<Scalar> r;
  r.n = n;
  r.beta = beta;
  r.theta = s.values.cwiseAbs2().maxCoeff() / norm2;
  r.rho = (s.values.maxCoeff() - s.values.minCoeff()) / std::sqrt(norm2);
  r.nu = std::max((Scalar(n) * r.theta + 1) / 4, Scalar(n) * r.rho * r.rho);
  const Scalar logn = std::log(Scalar(n));
  r.sample_bound = 2 * Scalar(n) * r.nu * (1 + beta) * logn * logn;
  return r;
}

}  // namespace skewrank
