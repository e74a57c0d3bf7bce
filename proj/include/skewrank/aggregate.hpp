// Aggregation of voter-by-item ratings into a skew-symmetric pairwise
// comparison matrix, plus support-based filtering into a constraint set.
//
// Five aggregation rules are provided. For items i and j, over the
// voters that rated both:
//   arithmetic_mean   mean of R(a,i) - R(a,j)           (translation invariant)
//   geometric_mean    mean of log R(a,i) - log R(a,j)   (scale invariant; R > 0)
//   binary            Pr{R(a,i) > R(a,j)} - Pr{R(a,i) < R(a,j)}
//   strict_binary     same, restricted to voters with a strict preference
//   log_odds          log( Pr{R(a,i) >= R(a,j)} / Pr{R(a,i) <= R(a,j)} )
// A positive value means item i is preferred over item j. binary,
// strict_binary and log_odds are invariant under strictly increasing
// transformations of the rating scale.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skewrank/types.hpp"

namespace skewrank {

enum class AggregationMethod {
  arithmetic_mean,
  geometric_mean,
  binary,
  strict_binary,
  log_odds,
};

inline std::string method_code(AggregationMethod m) {
  switch (m) {
    case AggregationMethod::arithmetic_mean: return "am";
    case AggregationMethod::geometric_mean: return "gm";
    case AggregationMethod::binary: return "bc";
    case AggregationMethod::strict_binary: return "sb";
    case AggregationMethod::log_odds: return "lo";
  }
  return "?";
}

inline std::optional<AggregationMethod> parse_method_code(std::string_view s) {
  if (s == "am") return AggregationMethod::arithmetic_mean;
  if (s == "gm") return AggregationMethod::geometric_mean;
  if (s == "bc") return AggregationMethod::binary;
  if (s == "sb") return AggregationMethod::strict_binary;
  if (s == "lo") return AggregationMethod::log_odds;
  return std::nullopt;
}

namespace detail {

template <typename Scalar>
struct PairStats {
  Index co = 0;       // voters who rated both items
  Scalar sum = 0;     // accumulated difference (plain or log)
  Index gt = 0;       // voters with R(a,i) > R(a,j)
  Index lt = 0;       // voters with R(a,i) < R(a,j)
};

}  // namespace detail

// Builds the aggregate pairwise comparison matrix. Entries are emitted
// only for pairs the method can score: at least one co-rater, for
// strict_binary at least one strict preference, and for log_odds both
// order probabilities nonzero (a unanimous pair has no finite log-odds
// and is treated as missing).
template <typename Scalar>
PairwiseMatrix<Scalar> aggregate(const RatingsMatrix<Scalar>& ratings,
                                 AggregationMethod method) {
  const bool needs_log = method == AggregationMethod::geometric_mean;
  if (needs_log) {
    for (const auto& e : ratings.entries()) {
      if (!(e.value > Scalar(0))) {
        throw DomainError(
            "geometric_mean requires strictly positive ratings; voter " +
            std::to_string(e.voter) + ", item " + std::to_string(e.item) +
            " has rating " + std::to_string(static_cast<double>(e.value)));
      }
    }
  }

  std::unordered_map<std::uint64_t, detail::PairStats<Scalar>> stats;
  const auto& entries = ratings.entries();
  std::size_t run_begin = 0;
  while (run_begin < entries.size()) {
    std::size_t run_end = run_begin;
    while (run_end < entries.size() &&
           entries[run_end].voter == entries[run_begin].voter) {
      ++run_end;
    }
    // Entries within a voter are sorted by item, so a < b gives i < j.
    for (std::size_t a = run_begin; a < run_end; ++a) {
      for (std::size_t b = a + 1; b < run_end; ++b) {
        auto& s = stats[detail::pack_pair(entries[a].item, entries[b].item)];
        s.co += 1;
        switch (method) {
          case AggregationMethod::arithmetic_mean:
            s.sum += entries[a].value - entries[b].value;
            break;
          case AggregationMethod::geometric_mean:
            s.sum += std::log(entries[a].value) - std::log(entries[b].value);
            break;
          default:
            if (entries[a].value > entries[b].value) {
              s.gt += 1;
            } else if (entries[a].value < entries[b].value) {
              s.lt += 1;
            }
            break;
        }
      }
    }
    run_begin = run_end;
  }

  std::vector<PairwiseEntry<Scalar>> upper;
  upper.reserve(stats.size());
  for (const auto& [key, s] : stats) {
    const Index i = static_cast<Index>(key >> 32);
    const Index j = static_cast<Index>(key & 0xffffffffu);
    Scalar value;
    Index support;
    switch (method) {
      case AggregationMethod::arithmetic_mean:
      case AggregationMethod::geometric_mean:
        value = s.sum / Scalar(s.co);
        support = s.co;
        break;
      case AggregationMethod::binary:
        value = Scalar(s.gt - s.lt) / Scalar(s.co);
        support = s.co;
        break;
      case AggregationMethod::strict_binary:
        if (s.gt + s.lt == 0) continue;  // no strict preference expressed
        value = Scalar(s.gt - s.lt) / Scalar(s.gt + s.lt);
        support = s.gt + s.lt;
        break;
      case AggregationMethod::log_odds: {
        const Index ge = s.co - s.lt;  // R(a,i) >= R(a,j)
        const Index le = s.co - s.gt;  // R(a,i) <= R(a,j)
        if (ge == 0 || le == 0) continue;  // log-odds undefined
        value = std::log(Scalar(ge) / Scalar(le));
        support = s.co;
        break;
      }
      default:
        continue;
    }
    upper.push_back({i, j, value, support});
  }
  return PairwiseMatrix<Scalar>(ratings.num_items(), std::move(upper));
}

// Keeps the entries of Y with support >= min_support and emits them as a
// skew-closed constraint set (both orientations). The result may be
// empty; callers decide whether that is an error.
template <typename Scalar>
SampleSet<Scalar> filter_support(const PairwiseMatrix<Scalar>& Y,
                                 Index min_support) {
  if (min_support < 0) {
    throw DomainError("minimum support must be nonnegative");
  }
  std::vector<IndexPair> upper;
  std::vector<Scalar> values;
  for (const auto& e : Y.upper()) {
    if (e.support >= min_support) {
      upper.emplace_back(e.i, e.j);
      values.push_back(e.value);
    }
  }
  VectorX<Scalar> b =
      Eigen::Map<const VectorX<Scalar>>(values.data(), values.size());
  return SampleSet<Scalar>::from_upper(Y.num_items(), upper, b);
}

struct SupportHistogram {
  std::vector<Index> edges;   // ascending thresholds
  std::vector<Index> counts;  // bins [0,e0), [e0,e1), ..., [e_last,inf)
  Index pairs_present = 0;
  Index pairs_possible = 0;

  double coverage() const {
    return pairs_possible == 0
               ? 0.0
               : static_cast<double>(pairs_present) /
                     static_cast<double>(pairs_possible);
  }

  Index count_at_least(Index threshold) const {
    Index total = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const Index lo = b == 0 ? 0 : edges[b - 1];
      if (lo >= threshold) total += counts[b];
    }
    return total;
  }
};

// Histogram of unordered-pair counts by support threshold, plus the
// fraction of all n(n-1)/2 possible pairs that carry an entry.
template <typename Scalar>
SupportHistogram support_histogram(const PairwiseMatrix<Scalar>& Y,
                                   std::vector<Index> bin_edges) {
  std::sort(bin_edges.begin(), bin_edges.end());
  bin_edges.erase(std::unique(bin_edges.begin(), bin_edges.end()),
                  bin_edges.end());
  for (Index e : bin_edges) {
    if (e <= 0) throw DomainError("histogram edges must be positive");
  }
  SupportHistogram h;
  h.edges = bin_edges;
  h.counts.assign(bin_edges.size() + 1, 0);
  h.pairs_possible = Y.possible_pairs();
  h.pairs_present = Y.num_pairs();
  for (const auto& e : Y.upper()) {
    const auto it =
        std::upper_bound(h.edges.begin(), h.edges.end(), e.support);
    h.counts[static_cast<std::size_t>(it - h.edges.begin())] += 1;
  }
  return h;
}

// Drops voters with fewer than min_ratings ratings and compacts the
// voter indices; item indices are unchanged.
template <typename Scalar>
RatingsMatrix<Scalar> filter_voters(const RatingsMatrix<Scalar>& ratings,
                                    Index min_ratings) {
  std::vector<Index> counts(static_cast<std::size_t>(ratings.num_voters()), 0);
  for (const auto& e : ratings.entries()) counts[e.voter] += 1;
  std::vector<Index> remap(counts.size(), -1);
  Index kept = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    if (counts[v] >= min_ratings) remap[v] = kept++;
  }
  std::vector<Rating<Scalar>> entries;
  entries.reserve(ratings.entries().size());
  for (const auto& e : ratings.entries()) {
    if (remap[e.voter] >= 0) {
      entries.push_back({remap[e.voter], e.item, e.value});
    }
  }
  return RatingsMatrix<Scalar>(kept, ratings.num_items(), std::move(entries));
}

}  // namespace skewrank
