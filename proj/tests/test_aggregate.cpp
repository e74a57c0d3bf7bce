#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>

#include "skewrank/aggregate.hpp"
#include "support.hpp"

using namespace skewrank;

namespace {

RatingsMatrix<double> make_ratings(Index voters, Index items,
                                   std::vector<Rating<double>> entries) {
  return RatingsMatrix<double>(voters, items, std::move(entries));
}

// Signed lookup: value of the (i, j) entry, using the stored (min, max)
// half and skew-symmetry.
std::optional<double> value_of(const PairwiseMatrix<double>& Y, Index i,
                               Index j) {
  const Index a = std::min(i, j), b = std::max(i, j);
  for (const auto& e : Y.upper()) {
    if (e.i == a && e.j == b) return i < j ? e.value : -e.value;
  }
  return std::nullopt;
}

std::optional<Index> support_of(const PairwiseMatrix<double>& Y, Index i,
                                Index j) {
  const Index a = std::min(i, j), b = std::max(i, j);
  for (const auto& e : Y.upper()) {
    if (e.i == a && e.j == b) return e.support;
  }
  return std::nullopt;
}

// Random sparse ratings with small integer values, so arithmetic-mean
// aggregates are exact in floating point.
RatingsMatrix<double> random_ratings(Index voters, Index items, double density,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> star(1, 5);
  std::vector<Rating<double>> entries;
  for (Index v = 0; v < voters; ++v) {
    for (Index i = 0; i < items; ++i) {
      if (uni(rng) < density) {
        entries.push_back({v, i, static_cast<double>(star(rng))});
      }
    }
  }
  return make_ratings(voters, items, std::move(entries));
}

constexpr AggregationMethod kAllMethods[] = {
    AggregationMethod::arithmetic_mean, AggregationMethod::geometric_mean,
    AggregationMethod::binary, AggregationMethod::strict_binary,
    AggregationMethod::log_odds};

}  // namespace

TEST_CASE("arithmetic mean of the two-voter example") {
  const auto R = make_ratings(2, 2, {{0, 0, 5}, {0, 1, 3}, {1, 0, 4}, {1, 1, 2}});
  const auto Y = aggregate(R, AggregationMethod::arithmetic_mean);
  REQUIRE(Y.num_pairs() == 1);
  CHECK(Y.upper()[0].i == 0);
  CHECK(Y.upper()[0].j == 1);
  CHECK(Y.upper()[0].value == 2.0);
  CHECK(Y.upper()[0].support == 2);
  CHECK(*value_of(Y, 1, 0) == -2.0);
}

TEST_CASE("identical columns give zero comparisons") {
  // Two items rated identically by all voters.
  const auto R = make_ratings(
      3, 2, {{0, 0, 4}, {0, 1, 4}, {1, 0, 2}, {1, 1, 2}, {2, 0, 5}, {2, 1, 5}});
  for (auto m : kAllMethods) {
    const auto Y = aggregate(R, m);
    if (m == AggregationMethod::strict_binary) {
      CHECK(Y.num_pairs() == 0);  // no strict preference anywhere
    } else {
      REQUIRE(Y.num_pairs() == 1);
      CHECK(Y.upper()[0].value == 0.0);
    }
  }
}

TEST_CASE("geometric mean of a single voter") {
  const auto R = make_ratings(1, 2, {{0, 0, 4}, {0, 1, 2}});
  const auto Y = aggregate(R, AggregationMethod::geometric_mean);
  REQUIRE(Y.num_pairs() == 1);
  CHECK(Y.upper()[0].value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("binary comparison is the probability difference") {
  // Three voters prefer item 0, one prefers item 1.
  const auto R = make_ratings(4, 2,
                              {{0, 0, 5}, {0, 1, 1}, {1, 0, 4}, {1, 1, 2},
                               {2, 0, 3}, {2, 1, 1}, {3, 0, 2}, {3, 1, 4}});
  const auto Y = aggregate(R, AggregationMethod::binary);
  REQUIRE(Y.num_pairs() == 1);
  CHECK(Y.upper()[0].value == 0.5);
  CHECK(Y.upper()[0].support == 4);
}

TEST_CASE("strict binary skips ties and counts only strict preferences") {
  const auto R = make_ratings(3, 2,
                              {{0, 0, 5}, {0, 1, 3},    // strict: 0 over 1
                               {1, 0, 4}, {1, 1, 4},    // tie, ignored
                               {2, 0, 1}, {2, 1, 2}});  // strict: 1 over 0
  const auto Y = aggregate(R, AggregationMethod::strict_binary);
  REQUIRE(Y.num_pairs() == 1);
  CHECK(Y.upper()[0].value == 0.0);   // (1 - 1) / 2
  CHECK(Y.upper()[0].support == 2);   // the tie does not count
}

TEST_CASE("log odds omits unanimous pairs") {
  // Every voter strictly prefers item 0: Pr{R_i <= R_j} = 0.
  const auto R = make_ratings(2, 2, {{0, 0, 5}, {0, 1, 1}, {1, 0, 4}, {1, 1, 2}});
  const auto Y = aggregate(R, AggregationMethod::log_odds);
  CHECK(Y.num_pairs() == 0);

  // One tie makes both probabilities positive: log(1 / (1/3)) = log 3.
  const auto R2 = make_ratings(
      3, 2, {{0, 0, 5}, {0, 1, 1}, {1, 0, 4}, {1, 1, 2}, {2, 0, 3}, {2, 1, 3}});
  const auto Y2 = aggregate(R2, AggregationMethod::log_odds);
  REQUIRE(Y2.num_pairs() == 1);
  CHECK(Y2.upper()[0].value == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(Y2.upper()[0].support == 3);
}

TEST_CASE("geometric mean rejects nonpositive ratings") {
  const auto R = make_ratings(1, 2, {{0, 0, 0}, {0, 1, 2}});
  CHECK_THROWS_AS(aggregate(R, AggregationMethod::geometric_mean), DomainError);
  const auto R2 = make_ratings(1, 2, {{0, 0, -1}, {0, 1, 2}});
  CHECK_THROWS_AS(aggregate(R2, AggregationMethod::geometric_mean), DomainError);
}

TEST_CASE("ratings matrix validation") {
  CHECK_THROWS_AS(make_ratings(1, 2, {{0, 0, 1}, {0, 0, 2}}), DomainError);
  CHECK_THROWS_AS(make_ratings(1, 2, {{0, 5, 1}}), DomainError);
  CHECK_THROWS_AS(make_ratings(1, 2, {{2, 0, 1}}), DomainError);
  CHECK_THROWS_AS(
      make_ratings(1, 2, {{0, 0, std::numeric_limits<double>::infinity()}}),
      DomainError);
}

TEST_CASE("filter_support keeps entries at or above the threshold") {
  std::vector<PairwiseEntry<double>> upper = {
      {0, 1, 1.5, 2}, {0, 2, -0.5, 30}, {1, 2, 0.25, 31}};
  const PairwiseMatrix<double> Y(3, std::move(upper));

  const auto filtered = filter_support(Y, 30);
  CHECK(filtered.size() == 4);  // two entries, both orientations
  filtered.validate();

  const auto everything = filter_support(Y, 0);
  CHECK(everything.size() == 6);
  everything.validate();

  const auto none = filter_support(Y, 100);
  CHECK(none.empty());
}

TEST_CASE("filtering the two-voter example at c = 3 is empty") {
  const auto R = make_ratings(2, 2, {{0, 0, 5}, {0, 1, 3}, {1, 0, 4}, {1, 1, 2}});
  const auto Y = aggregate(R, AggregationMethod::arithmetic_mean);
  CHECK(filter_support(Y, 3).empty());
}

TEST_CASE("filter_support round-trips the full entry set at c = 0") {
  const auto R = random_ratings(20, 8, 0.6, 991);
  const auto Y = aggregate(R, AggregationMethod::arithmetic_mean);
  const auto samples = filter_support(Y, 0);
  REQUIRE(samples.size() == 2 * Y.num_pairs());
  for (Index q = 0; q < Y.num_pairs(); ++q) {
    const auto& e = Y.upper()[static_cast<std::size_t>(q)];
    CHECK(samples.pairs[static_cast<std::size_t>(2 * q)] == IndexPair{e.i, e.j});
    CHECK(samples.values[2 * q] == e.value);
    CHECK(samples.values[2 * q + 1] == -e.value);
  }
}

TEST_CASE("support histogram over a small matrix") {
  std::vector<PairwiseEntry<double>> upper = {
      {0, 1, 1.0, 2}, {0, 2, 1.0, 30}, {1, 2, 1.0, 31}};
  const PairwiseMatrix<double> Y(3, std::move(upper));
  const auto h = support_histogram(Y, {30});
  CHECK(h.coverage() == 1.0);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.counts[0] == 1);  // support in [0, 30)
  CHECK(h.counts[1] == 2);  // support >= 30
  CHECK(h.count_at_least(30) == 2);
}

TEST_CASE("support histogram of an empty matrix") {
  const PairwiseMatrix<double> Y(4, {});
  const auto h = support_histogram(Y, {10, 20});
  CHECK(h.coverage() == 0.0);
  for (Index c : h.counts) CHECK(c == 0);
}

TEST_CASE("relabeling items mirrors entries with negated values") {
  // Skew-symmetry under the hood: the emitted value must not depend on
  // which index happens to be stored as the upper one.
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto R = random_ratings(25, 7, 0.7, seed);
    // Reverse item labels.
    std::vector<Rating<double>> relabeled;
    for (const auto& e : R.entries()) {
      relabeled.push_back({e.voter, R.num_items() - 1 - e.item, e.value});
    }
    const auto Rrev = make_ratings(R.num_voters(), R.num_items(), relabeled);
    for (auto m : kAllMethods) {
      const auto Y = aggregate(R, m);
      const auto Yrev = aggregate(Rrev, m);
      REQUIRE(Y.num_pairs() == Yrev.num_pairs());
      for (const auto& e : Y.upper()) {
        const auto v = value_of(Yrev, R.num_items() - 1 - e.i,
                                R.num_items() - 1 - e.j);
        REQUIRE(v.has_value());
        if (m == AggregationMethod::log_odds) {
          // log(p/q) and -log(q/p) are one rounding apart; which one is
          // stored depends on the labeling.
          CHECK(*v == doctest::Approx(e.value).epsilon(1e-14));
        } else {
          CHECK(*v == e.value);
        }
        CHECK(*support_of(Yrev, R.num_items() - 1 - e.i,
                          R.num_items() - 1 - e.j) == e.support);
      }
    }
  }
}

TEST_CASE("arithmetic mean is translation invariant") {
  for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
    const auto R = random_ratings(30, 6, 0.5, seed);
    for (double gamma : {1.0, -3.0, 7.0}) {
      std::vector<Rating<double>> shifted;
      for (const auto& e : R.entries()) {
        shifted.push_back({e.voter, e.item, e.value + gamma});
      }
      const auto Rs = make_ratings(R.num_voters(), R.num_items(), shifted);
      const auto Y = aggregate(R, AggregationMethod::arithmetic_mean);
      const auto Ys = aggregate(Rs, AggregationMethod::arithmetic_mean);
      REQUIRE(Y.num_pairs() == Ys.num_pairs());
      for (Index q = 0; q < Y.num_pairs(); ++q) {
        CHECK(Y.upper()[q].value == Ys.upper()[q].value);  // exact
        CHECK(Y.upper()[q].support == Ys.upper()[q].support);
      }
    }
  }
}

TEST_CASE("geometric mean is scale invariant") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const auto R = random_ratings(30, 6, 0.5, seed);
    for (double gamma : {2.0, 0.125, 9.5}) {
      std::vector<Rating<double>> scaled;
      for (const auto& e : R.entries()) {
        scaled.push_back({e.voter, e.item, e.value * gamma});
      }
      const auto Rs = make_ratings(R.num_voters(), R.num_items(), scaled);
      const auto Y = aggregate(R, AggregationMethod::geometric_mean);
      const auto Ys = aggregate(Rs, AggregationMethod::geometric_mean);
      REQUIRE(Y.num_pairs() == Ys.num_pairs());
      for (Index q = 0; q < Y.num_pairs(); ++q) {
        // log(gamma r) rounds differently from log r, so demand agreement
        // to a few ulps rather than bitwise.
        CHECK(Y.upper()[q].value ==
              doctest::Approx(Ys.upper()[q].value).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("order-based methods are invariant under monotone transforms") {
  const auto monotone = [](double x) { return x * x * x + 2 * x + 1; };
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    const auto R = random_ratings(30, 6, 0.5, seed);
    std::vector<Rating<double>> mapped;
    for (const auto& e : R.entries()) {
      mapped.push_back({e.voter, e.item, monotone(e.value)});
    }
    const auto Rm = make_ratings(R.num_voters(), R.num_items(), mapped);
    for (auto m : {AggregationMethod::binary, AggregationMethod::strict_binary,
                   AggregationMethod::log_odds}) {
      const auto Y = aggregate(R, m);
      const auto Ym = aggregate(Rm, m);
      REQUIRE(Y.num_pairs() == Ym.num_pairs());
      for (Index q = 0; q < Y.num_pairs(); ++q) {
        CHECK(Y.upper()[q].value == Ym.upper()[q].value);  // exact
        CHECK(Y.upper()[q].support == Ym.upper()[q].support);
      }
    }
  }
}

TEST_CASE("voter filtering drops sparse raters before aggregation") {
  const auto R = make_ratings(
      3, 3, {{0, 0, 5}, {0, 1, 3}, {0, 2, 1}, {1, 0, 2}, {2, 1, 4}, {2, 2, 2}});
  const auto filtered = filter_voters(R, 2);
  CHECK(filtered.num_voters() == 2);  // voter 1 had a single rating
  CHECK(filtered.entries().size() == 5);
  const auto all = filter_voters(R, 0);
  CHECK(all.num_voters() == 3);
}

TEST_CASE("method codes round-trip") {
  for (auto m : kAllMethods) {
    const auto parsed = parse_method_code(method_code(m));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == m);
  }
  CHECK(!parse_method_code("xx").has_value());
}
