// Core data model for pairwise rank aggregation: ratings, aggregate
// pairwise comparisons, sampled constraint sets, low-rank factors and
// score vectors. All dense storage is Eigen; types are templated on the
// scalar with `d` aliases for double.
#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace skewrank {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IndexPair = std::pair<Index, Index>;

// Input-domain violations (invalid ratings, impossible requests).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input files; carries the 1-based offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::uint64_t pack_pair(Index i, Index j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ratings

template <typename Scalar>
struct Rating {
  Index voter;
  Index item;
  Scalar value;
};

// Sparse voter-by-item cardinal ratings. Entries are kept sorted by
// (voter, item); at most one rating per cell, all values finite.
template <typename Scalar>
class RatingsMatrix {
 public:
  RatingsMatrix() = default;

  RatingsMatrix(Index num_voters, Index num_items,
                std::vector<Rating<Scalar>> entries)
      : num_voters_(num_voters),
        num_items_(num_items),
        entries_(std::move(entries)) {
    if (num_voters_ < 0 || num_items_ < 0) {
      throw DomainError("ratings matrix dimensions must be nonnegative");
    }
    for (const auto& e : entries_) {
      if (e.voter < 0 || e.voter >= num_voters_ || e.item < 0 ||
          e.item >= num_items_) {
        throw DomainError("rating index out of range: voter " +
                          std::to_string(e.voter) + ", item " +
                          std::to_string(e.item));
      }
      if (!std::isfinite(static_cast<double>(e.value))) {
        throw DomainError("non-finite rating for voter " +
                          std::to_string(e.voter) + ", item " +
                          std::to_string(e.item));
      }
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Rating<Scalar>& a, const Rating<Scalar>& b) {
                return a.voter != b.voter ? a.voter < b.voter
                                          : a.item < b.item;
              });
    for (std::size_t t = 1; t < entries_.size(); ++t) {
      if (entries_[t].voter == entries_[t - 1].voter &&
          entries_[t].item == entries_[t - 1].item) {
        throw DomainError("duplicate rating for voter " +
                          std::to_string(entries_[t].voter) + ", item " +
                          std::to_string(entries_[t].item));
      }
    }
  }

  Index num_voters() const { return num_voters_; }
  Index num_items() const { return num_items_; }
  const std::vector<Rating<Scalar>>& entries() const { return entries_; }

 private:
  Index num_voters_ = 0;
  Index num_items_ = 0;
  std::vector<Rating<Scalar>> entries_;
};

using RatingsMatrixd = RatingsMatrix<double>;

// ---------------------------------------------------------------------------
// Aggregate pairwise comparisons

template <typename Scalar>
struct PairwiseEntry {
  Index i;        // first item, i < j
  Index j;        // second item
  Scalar value;   // aggregate preference of i over j; the (j,i) value is -value
  Index support;  // comparisons backing the entry
};

// Skew-symmetric aggregate comparison matrix. Only the i < j half is
// stored; the mirrored half is implied with negated values and equal
// support, which makes skew-symmetry and support symmetry structural.
template <typename Scalar>
class PairwiseMatrix {
 public:
  PairwiseMatrix() = default;

  PairwiseMatrix(Index num_items, std::vector<PairwiseEntry<Scalar>> upper)
      : num_items_(num_items), upper_(std::move(upper)) {
    std::sort(upper_.begin(), upper_.end(),
              [](const PairwiseEntry<Scalar>& a, const PairwiseEntry<Scalar>& b) {
                return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    for (std::size_t t = 0; t < upper_.size(); ++t) {
      const auto& e = upper_[t];
      if (e.i < 0 || e.j >= num_items_ || e.i >= e.j) {
        throw DomainError("pairwise entry must satisfy 0 <= i < j < n");
      }
      if (e.support < 1) {
        throw DomainError("pairwise entry support must be >= 1");
      }
      if (!std::isfinite(static_cast<double>(e.value))) {
        throw DomainError("non-finite pairwise value");
      }
      if (t > 0 && upper_[t - 1].i == e.i && upper_[t - 1].j == e.j) {
        throw DomainError("duplicate pairwise entry");
      }
    }
  }

  Index num_items() const { return num_items_; }
  // Entries with i < j, sorted by (i, j).
  const std::vector<PairwiseEntry<Scalar>>& upper() const { return upper_; }
  Index num_pairs() const { return static_cast<Index>(upper_.size()); }
  Index possible_pairs() const { return num_items_ * (num_items_ - 1) / 2; }

 private:
  Index num_items_ = 0;
  std::vector<PairwiseEntry<Scalar>> upper_;
};

using PairwiseMatrixd = PairwiseMatrix<double>;

// ---------------------------------------------------------------------------
// Sampled affine constraints

// Index set with target values b: the constraints X(r,c) = b for every
// listed oriented pair. Always skew-closed: (r,c,v) appears iff (c,r,-v)
// does, so a skew-symmetric solution is representable.
template <typename Scalar>
struct SampleSet {
  Index num_items = 0;
  std::vector<IndexPair> pairs;  // oriented, skew-closed
  VectorX<Scalar> values;        // b, parallel to pairs

  bool empty() const { return pairs.empty(); }
  Index size() const { return static_cast<Index>(pairs.size()); }

  // Builds the skew closure of an upper (i < j) list, interleaving the
  // two orientations so read/write round-trips preserve order.
  static SampleSet from_upper(Index num_items,
                              const std::vector<IndexPair>& upper,
                              const VectorX<Scalar>& upper_values) {
    if (static_cast<Index>(upper.size()) != upper_values.size()) {
      throw DomainError("sample pairs/values size mismatch");
    }
    SampleSet out;
    out.num_items = num_items;
    out.pairs.reserve(2 * upper.size());
    out.values.resize(2 * upper_values.size());
    Index t = 0;
    for (std::size_t q = 0; q < upper.size(); ++q) {
      const auto [i, j] = upper[q];
      if (i < 0 || j >= num_items || i >= j) {
        throw DomainError("sample pair must satisfy 0 <= i < j < n");
      }
      out.pairs.emplace_back(i, j);
      out.values[t++] = upper_values[static_cast<Index>(q)];
      out.pairs.emplace_back(j, i);
      out.values[t++] = -upper_values[static_cast<Index>(q)];
    }
    return out;
  }

  // Checks pair validity, uniqueness and exact skew closure.
  void validate() const {
    if (static_cast<Index>(pairs.size()) != values.size()) {
      throw DomainError("sample pairs/values size mismatch");
    }
    std::unordered_map<std::uint64_t, Index> where;
    where.reserve(pairs.size());
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      const auto [r, c] = pairs[t];
      if (r < 0 || c < 0 || r >= num_items || c >= num_items) {
        throw DomainError("sample pair index out of range");
      }
      if (r == c) {
        throw DomainError("sample set must not contain diagonal pairs");
      }
      if (!where.emplace(detail::pack_pair(r, c), static_cast<Index>(t))
               .second) {
        throw DomainError("duplicate sample pair");
      }
    }
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      const auto [r, c] = pairs[t];
      auto it = where.find(detail::pack_pair(c, r));
      if (it == where.end() ||
          values[it->second] != -values[static_cast<Index>(t)]) {
        throw DomainError("sample set is not skew-closed");
      }
    }
  }
};

using SampleSetd = SampleSet<double>;

// ---------------------------------------------------------------------------
// Low-rank factors

// Truncated SVD factors X = U diag(S) V^T with orthonormal column blocks
// and nonincreasing S >= 0.
template <typename Scalar>
struct LowRankFactors {
  MatrixX<Scalar> U;  // n x k
  VectorX<Scalar> S;  // k
  MatrixX<Scalar> V;  // n x k

  Index rows() const { return U.rows(); }
  Index rank() const { return S.size(); }

  static LowRankFactors Zero(Index n, Index k) {
    LowRankFactors f;
    f.U = MatrixX<Scalar>::Identity(n, k);
    f.S = VectorX<Scalar>::Zero(k);
    f.V = MatrixX<Scalar>::Identity(n, k);
    return f;
  }

  // Materializes the n x n matrix; intended for small n and tests.
  MatrixX<Scalar> matrix() const { return U * S.asDiagonal() * V.transpose(); }

  Scalar entry(Index r, Index c) const {
    return (U.row(r).array() * S.transpose().array() * V.row(c).array()).sum();
  }

  Scalar frobenius_norm() const { return S.norm(); }

  // ||X + X^T||_F computed through a QR factorization of [U V] so small
  // defects are not lost to cancellation; never materializes X.
  Scalar skew_defect() const {
    const Index k = rank();
    if (k == 0) return Scalar(0);
    MatrixX<Scalar> G(rows(), 2 * k);
    G.leftCols(k) = U;
    G.rightCols(k) = V;
    Eigen::HouseholderQR<MatrixX<Scalar>> qr(G);
    MatrixX<Scalar> R = qr.matrixQR()
                            .topRows(std::min(G.rows(), G.cols()))
                            .template triangularView<Eigen::Upper>();
    // X + X^T = [U V] [[0,S],[S,0]] [U V]^T, so the norm is carried by
    // R M R^T with M the small symmetric coupling block.
    MatrixX<Scalar> M = MatrixX<Scalar>::Zero(2 * k, 2 * k);
    M.topRightCorner(k, k) = S.asDiagonal();
    M.bottomLeftCorner(k, k) = S.asDiagonal();
    return (R * M * R.transpose()).norm();
  }
};

using LowRankFactorsd = LowRankFactors<double>;

// ---------------------------------------------------------------------------
// Scores and rankings

template <typename Scalar>
struct ScoreVector {
  VectorX<Scalar> values;
  // True when the producing matrix was skew-symmetric, which forces
  // e^T s = 0 without explicit recentering.
  bool centered = false;

  Index size() const { return values.size(); }
};

using ScoreVectord = ScoreVector<double>;

template <typename Scalar>
struct RankedItem {
  Index item;        // original dense index
  std::string id;    // original external id
  Scalar score;
};

template <typename Scalar>
using RankedList = std::vector<RankedItem<Scalar>>;

using RankedListd = RankedList<double>;

// A residual norm; `relative` is false only when ||b|| = 0 and the
// absolute norm is reported instead.
template <typename Scalar>
struct Residual {
  Scalar value;
  bool relative;
};

}  // namespace skewrank
