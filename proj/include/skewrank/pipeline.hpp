// End-to-end commands behind the CLI: ingestion -> aggregation ->
// completion -> ranking -> diagnostics, plus the two synthetic studies.
// Every command writes a run.meta record sufficient to rerun it, and all
// outputs are byte-deterministic for a fixed config and seed.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skewrank/aggregate.hpp"
#include "skewrank/coherence.hpp"
#include "skewrank/experiments.hpp"
#include "skewrank/io.hpp"
#include "skewrank/scoring.hpp"
#include "skewrank/svp.hpp"

namespace skewrank {

struct RunConfig {
  AggregationMethod method = AggregationMethod::arithmetic_mean;
  Index min_user_ratings = 0;  // drop voters with fewer ratings (0 = keep all)
  Index min_support = 0;       // drop pairwise entries with fewer comparisons
  SolverConfig<double> solver;
  double coherence_beta = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path input;
  std::filesystem::path output_dir;
  char delimiter = ',';
  // rank: treat `input` as an aggregate output directory instead of a
  // ratings file.
  bool input_is_pairwise = false;
};

// Model naming code, e.g. "am 6 30" for an arithmetic-mean matrix from
// voters with >= 6 ratings and entries with >= 30 comparisons; a zero
// voter threshold reads "all".
std::string model_code(AggregationMethod method, Index min_user_ratings,
                       Index min_support);

// Writes items.map, pairwise.coo, pairwise.support and run.meta.
void run_aggregate(const RunConfig& config);

struct RankOutcome {
  RankedList<double> ranking;
  ScoreVector<double> scores;
  SvpResult<double> solved;
  Residual<double> score_resid;
  CoherenceReport<double> coh;
  Index num_items = 0;
  Index num_constraints = 0;
};

// Full pipeline; writes ranking.csv, factors_{U,S,V}.txt, samples.coo,
// items.map, diagnostics.meta and run.meta.
RankOutcome run_rank(const RunConfig& config);

struct AnalyzeReport {
  Residual<double> solver_resid;
  Residual<double> score_resid;
  CoherenceReport<double> coh;
};

// Recomputes the diagnostics of a rank output directory from its
// persisted samples and factors; writes analyze.meta.
AnalyzeReport run_analyze(const RunConfig& config);

struct SynthRecoveryConfig {
  Index n = 100;
  std::vector<Index> sample_counts;  // oriented entries; empty = {1..7} n ln n
  std::vector<double> noise_levels{0.0};
  ScoreModel score_model = ScoreModel::uniform_random;
  Index trials = 50;
  std::uint64_t seed = 0;
  SolverConfig<double> solver;
  std::filesystem::path output_dir;
  Index threads = 0;
};

// Sweeps sample counts (and noise levels) and writes per-trial rows plus
// a success-fraction summary, both as plot-ready CSV.
void run_synth_recovery(const SynthRecoveryConfig& config);

struct SynthIrtConfig {
  Index num_users = 1000;
  Index num_items = 100;
  std::vector<double> avg_ratings{5.0};
  std::vector<double> noise_levels{0.0, 0.25, 0.5, 0.75, 1.0};
  AggregationMethod method = AggregationMethod::arithmetic_mean;
  Index trials = 50;
  std::uint64_t seed = 0;
  SolverConfig<double> solver;
  std::filesystem::path output_dir;
  Index threads = 0;
};

// Item-response comparison of the completion pipeline against per-item
// mean ratings; writes per-trial rows and a quartile summary.
void run_synth_irt(const SynthIrtConfig& config);

}  // namespace skewrank
