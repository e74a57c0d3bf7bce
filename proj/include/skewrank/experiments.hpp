// Synthetic studies: score-vector recovery from randomly sampled
// pairwise differences, and an item-response rating model for comparing
// the completion pipeline against per-item mean ratings.
//
// Determinism contract: identical spec + seed gives identical outcomes.
// Each trial derives its own generator seed from (master seed, trial
// index), so trials may run on any number of threads without changing
// results.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "skewrank/aggregate.hpp"
#include "skewrank/scoring.hpp"
#include "skewrank/svp.hpp"
#include "skewrank/types.hpp"

namespace skewrank {

// splitmix64-style mixing; gives decorrelated per-trial seeds.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

// Runs per_trial(t) for t in [0, trials) on `threads` workers (0 = all
// hardware threads). Each trial owns its seed, so scheduling never
// affects results.
template <typename Fn>
void for_each_trial(Index trials, Index threads, Fn&& per_trial) {
  if (threads <= 0) {
    threads = static_cast<Index>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, trials);
  if (threads <= 1) {
    for (Index t = 0; t < trials; ++t) per_trial(t);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (Index w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (Index t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
        per_trial(t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pairwise-difference generator and sampling

// Y(i,j) = s_i - s_j + eps * (E(i,j) - E(j,i)) / 2 with E standard
// normal. The noise is skew-symmetrized (per-entry sd eps/sqrt(2)) so Y
// stays exactly skew-symmetric entrywise for every eps.
inline MatrixX<double> gen_pairwise_from_scores(const VectorX<double>& s,
                                                double noise_eps,
                                                std::uint64_t seed) {
  if (noise_eps < 0) throw DomainError("noise level must be nonnegative");
  const Index n = s.size();
  MatrixX<double> Y = MatrixX<double>::Zero(n, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      double v = s[i] - s[j];
      if (noise_eps > 0) {
        v += 0.5 * noise_eps * (normal(rng) - normal(rng));
      }
      Y(i, j) = v;
      Y(j, i) = -v;
    }
  }
  return Y;
}

// Uniformly samples m unordered off-diagonal pairs without replacement
// and emits the skew-closed constraint set (2m oriented entries).
inline SampleSet<double> sample_entries(const MatrixX<double>& Y, Index m,
                                        std::uint64_t seed) {
  const Index n = Y.rows();
  if (Y.cols() != n) throw DomainError("pairwise matrix must be square");
  const Index total = n * (n - 1) / 2;
  if (m <= 0) throw DomainError("cannot sample an empty constraint set");
  if (m > total) {
    throw DomainError("requested " + std::to_string(m) + " pairs but only " +
                      std::to_string(total) + " exist");
  }
  std::vector<IndexPair> all;
  all.reserve(static_cast<std::size_t>(total));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) all.emplace_back(i, j);
  }
  std::mt19937_64 rng(seed);
  for (Index t = 0; t < m; ++t) {  // partial Fisher-Yates
    std::uniform_int_distribution<Index> pick(t, total - 1);
    std::swap(all[static_cast<std::size_t>(t)],
              all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(m));
  std::sort(all.begin(), all.end());
  VectorX<double> values(m);
  for (Index t = 0; t < m; ++t) {
    values[t] = Y(all[static_cast<std::size_t>(t)].first,
                  all[static_cast<std::size_t>(t)].second);
  }
  return SampleSet<double>::from_upper(n, all, values);
}

// ---------------------------------------------------------------------------
// Kendall tau

// tau-a: (concordant - discordant) / (n(n-1)/2); tied pairs in either
// vector count as neither. Undefined for constant input.
inline double kendall_tau(const VectorX<double>& x, const VectorX<double>& y) {
  const Index n = x.size();
  if (y.size() != n) throw DomainError("kendall_tau requires equal lengths");
  if (n < 2) throw DomainError("kendall_tau requires at least two entries");
  if ((x.array() == x[0]).all() || (y.array() == y[0]).all()) {
    throw DomainError("kendall_tau is undefined for a constant vector");
  }
  long long concordant = 0, discordant = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      const double prod = dx * dy;
      if (prod > 0) ++concordant;
      else if (prod < 0) ++discordant;
    }
  }
  return static_cast<double>(concordant - discordant) /
         (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

struct Quartiles {
  double q25 = 0;
  double median = 0;
  double q75 = 0;
};

// Linear interpolation between closest ranks.
inline Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) throw DomainError("quartiles of an empty set");
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + frac * (v[lo + 1] - v[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

// ---------------------------------------------------------------------------
// Recovery study

enum class ScoreModel {
  uniform_random,  // iid U(0, 1)
  uniform_spaced,  // evenly spaced on [0, 1]
};

struct RecoveryTrialSpec {
  Index n = 100;
  // Oriented sample budget; the harness draws ceil(num_samples / 2)
  // unordered pairs and skew-closes them.
  Index num_samples = 0;
  double noise_eps = 0;
  ScoreModel score_model = ScoreModel::uniform_random;
  std::uint64_t seed = 0;
  Index trials = 50;
};

struct RecoveryTrialOutcome {
  bool success = false;
  bool converged = false;
  double score_error = 0;  // relative 2-norm error vs centered truth
  bool order_exact = false;
  Index iterations = 0;
};

struct RecoveryResult {
  std::vector<RecoveryTrialOutcome> trials;
  double success_fraction = 0;
  Index nonconverged = 0;
};

// One recovery trial: draw scores, build the pairwise matrix, sample,
// complete at rank 2 and compare the extracted scores with the truth.
// Noiseless success means relative score error < 1e-3; noisy success
// means the recovered order matches exactly. A solve that does not reach
// tolerance counts as a failed trial and is tallied separately.
inline RecoveryResult recovery_trial(const RecoveryTrialSpec& spec,
                                     const SolverConfig<double>& solver = {},
                                     Index threads = 0) {
  if (spec.n < 2) throw DomainError("recovery study needs n >= 2");
  if (spec.trials < 1) throw DomainError("trials must be >= 1");
  if (spec.num_samples < 1 || spec.num_samples > spec.n * (spec.n - 1)) {
    throw DomainError("num_samples must lie in [1, n(n-1)]");
  }

  RecoveryResult result;
  result.trials.resize(static_cast<std::size_t>(spec.trials));
  detail::for_each_trial(spec.trials, threads, [&](Index t) {
    const std::uint64_t st = trial_seed(spec.seed, static_cast<std::uint64_t>(t));
    std::mt19937_64 rng(st);
    VectorX<double> s(spec.n);
    if (spec.score_model == ScoreModel::uniform_random) {
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      for (Index i = 0; i < spec.n; ++i) s[i] = uni(rng);
    } else {
      for (Index i = 0; i < spec.n; ++i) {
        s[i] = static_cast<double>(i) / static_cast<double>(spec.n - 1);
      }
    }
    const VectorX<double> s_centered = s.array() - s.mean();

    const MatrixX<double> Y =
        gen_pairwise_from_scores(s, spec.noise_eps, trial_seed(st, 1));
    const Index m_pairs =
        std::min((spec.num_samples + 1) / 2, spec.n * (spec.n - 1) / 2);
    const SampleSet<double> samples = sample_entries(Y, m_pairs, trial_seed(st, 2));

    auto& out = result.trials[static_cast<std::size_t>(t)];
    const SvpResult<double> solved = svp_complete(samples, solver);
    const ScoreVector<double> shat = extract_scores(solved.factors);
    out.converged = solved.converged;
    out.iterations = solved.iterations;
    out.score_error =
        (shat.values - s_centered).norm() / s_centered.norm();
    out.order_exact = kendall_tau(shat.values, s_centered) == 1.0;
    const bool accurate = spec.noise_eps == 0 ? out.score_error < 1e-3
                                              : out.order_exact;
    out.success = accurate && out.converged;
  });

  Index successes = 0;
  for (const auto& t : result.trials) {
    successes += t.success ? 1 : 0;
    result.nonconverged += t.converged ? 0 : 1;
  }
  result.success_fraction =
      static_cast<double>(successes) / static_cast<double>(spec.trials);
  return result;
}

// ---------------------------------------------------------------------------
// Item-response study

struct IRTSpec {
  Index num_users = 1000;
  Index num_items = 100;
  double avg_ratings_per_user = 5;
  double noise_eps = 0;
  std::uint64_t seed = 0;
  Index trials = 50;
};

struct IRTData {
  RatingsMatrix<double> ratings;
  VectorX<double> true_scores;  // t, one per item
};

// Discrete five-level threshold function.
inline double rating_level(double a) {
  if (a < 1.5) return 1;
  if (a < 2.5) return 2;
  if (a < 3.5) return 3;
  if (a < 4.5) return 4;
  return 5;
}

// Rating model R(u, i) = L[a_u + b_u * t_i + eps * N(0,1)] with per-user
// center a_u ~ N(3,1), sensitivity b_u ~ N(0.5,0.5) and item quality
// t_i ~ N(0.1,1). Each cell is rated independently with probability
// avg_ratings_per_user / num_items.
inline IRTData gen_irt_ratings(const IRTSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 1) {
    throw DomainError("item-response model needs users and items");
  }
  if (!(spec.avg_ratings_per_user > 0) ||
      spec.avg_ratings_per_user > static_cast<double>(spec.num_items)) {
    throw DomainError("avg_ratings_per_user must lie in (0, num_items]");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorX<double> center(spec.num_users), sensitivity(spec.num_users);
  for (Index u = 0; u < spec.num_users; ++u) center[u] = 3.0 + normal(rng);
  for (Index u = 0; u < spec.num_users; ++u) {
    sensitivity[u] = 0.5 + 0.5 * normal(rng);
  }
  IRTData data;
  data.true_scores.resize(spec.num_items);
  for (Index i = 0; i < spec.num_items; ++i) {
    data.true_scores[i] = 0.1 + normal(rng);
  }
  const double p = spec.avg_ratings_per_user / static_cast<double>(spec.num_items);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Rating<double>> entries;
  for (Index u = 0; u < spec.num_users; ++u) {
    for (Index i = 0; i < spec.num_items; ++i) {
      if (uni(rng) >= p) continue;
      const double raw = center[u] + sensitivity[u] * data.true_scores[i] +
                         spec.noise_eps * normal(rng);
      entries.push_back({u, i, rating_level(raw)});
    }
  }
  data.ratings =
      RatingsMatrix<double>(spec.num_users, spec.num_items, std::move(entries));
  return data;
}

struct IRTTrialOutcome {
  double tau_nn = 0;    // completion pipeline vs true scores
  double tau_mean = 0;  // per-item mean rating vs true scores
  bool converged = false;
  Index items_unrated = 0;  // excluded from the mean-rating baseline
};

struct IRTComparison {
  std::vector<IRTTrialOutcome> trials;
  Quartiles tau_nn_q;
  Quartiles tau_mean_q;
};

// Per trial: generate ratings, run the full pipeline (aggregate, keep all
// entries, complete at rank 2, extract scores) and correlate against the
// true item scores; the baseline is the per-item mean rating with
// unrated items dropped from its correlation. The solver frequently
// stops at max_iterations on noisy data; those trials still count, the
// flag is informational.
inline IRTComparison irt_comparison(
    const IRTSpec& spec,
    AggregationMethod method = AggregationMethod::arithmetic_mean,
    const SolverConfig<double>& solver = {}, Index threads = 0) {
  if (spec.trials < 1) throw DomainError("trials must be >= 1");
  IRTComparison result;
  result.trials.resize(static_cast<std::size_t>(spec.trials));
  detail::for_each_trial(spec.trials, threads, [&](Index t) {
    IRTSpec sub = spec;
    sub.seed = trial_seed(spec.seed, static_cast<std::uint64_t>(t));
    const IRTData data = gen_irt_ratings(sub);
    auto& out = result.trials[static_cast<std::size_t>(t)];

    const PairwiseMatrix<double> Y = aggregate(data.ratings, method);
    const SampleSet<double> samples = filter_support(Y, 0);
    const SvpResult<double> solved = svp_complete(samples, solver);
    const ScoreVector<double> s = extract_scores(solved.factors);
    out.converged = solved.converged;
    out.tau_nn = kendall_tau(s.values, data.true_scores);

    VectorX<double> sums = VectorX<double>::Zero(spec.num_items);
    VectorX<double> counts = VectorX<double>::Zero(spec.num_items);
    for (const auto& e : data.ratings.entries()) {
      sums[e.item] += e.value;
      counts[e.item] += 1;
    }
    std::vector<double> mean_rated, truth_rated;
    for (Index i = 0; i < spec.num_items; ++i) {
      if (counts[i] > 0) {
        mean_rated.push_back(sums[i] / counts[i]);
        truth_rated.push_back(data.true_scores[i]);
      } else {
        out.items_unrated += 1;
      }
    }
    const Index m = static_cast<Index>(mean_rated.size());
    out.tau_mean = kendall_tau(
        Eigen::Map<const VectorX<double>>(mean_rated.data(), m),
        Eigen::Map<const VectorX<double>>(truth_rated.data(), m));
  });

  std::vector<double> nn, mean;
  for (const auto& t : result.trials) {
    nn.push_back(t.tau_nn);
    mean.push_back(t.tau_mean);
  }
  result.tau_nn_q = quartiles(nn);
  result.tau_mean_q = quartiles(mean);
  return result;
}

}  // namespace skewrank
