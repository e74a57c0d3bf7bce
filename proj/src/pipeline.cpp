#include "skewrank/pipeline.hpp"

#include <cmath>
#include <fstream>

namespace skewrank {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

void base_metadata(io::Metadata& meta, const std::string& command,
                   const RunConfig& config) {
  meta.set("command", command);
  meta.set("model", model_code(config.method, config.min_user_ratings,
                               config.min_support));
  meta.set("method", method_code(config.method));
  meta.set("min_user_ratings", config.min_user_ratings);
  meta.set("min_support", config.min_support);
  meta.set("rank", config.solver.target_rank);
  meta.set("eta", config.solver.step_length);
  meta.set("tol", config.solver.tolerance);
  meta.set("max_iterations", config.solver.max_iterations);
  meta.set("seed", static_cast<Index>(config.seed));
  meta.set("input", config.input.string());
}

struct LoadedRatings {
  RatingsMatrix<double> ratings;  // after voter filtering
  std::vector<std::string> item_ids;
  Index voters_total = 0;
  Index voters_used = 0;
};

LoadedRatings load_and_filter(const RunConfig& config) {
  io::RatingsFile file = io::read_ratings(config.input, {config.delimiter});
  LoadedRatings out;
  out.voters_total = file.ratings.num_voters();
  out.item_ids = std::move(file.item_ids);

  if (config.method == AggregationMethod::geometric_mean) {
    // Name offending records with their external ids; only voters that
    // survive the pre-filter matter.
    std::vector<Index> counts(static_cast<std::size_t>(out.voters_total), 0);
    for (const auto& e : file.ratings.entries()) counts[e.voter] += 1;
    for (const auto& e : file.ratings.entries()) {
      if (counts[e.voter] >= config.min_user_ratings && !(e.value > 0)) {
        throw DomainError(
            "geometric_mean requires strictly positive ratings; voter '" +
            file.voter_ids[static_cast<std::size_t>(e.voter)] + "', item '" +
            out.item_ids[static_cast<std::size_t>(e.item)] + "' has rating " +
            io::format_double(e.value));
      }
    }
  }
  out.ratings = config.min_user_ratings > 0
                    ? filter_voters(file.ratings, config.min_user_ratings)
                    : std::move(file.ratings);
  out.voters_used = out.ratings.num_voters();
  return out;
}

}  // namespace

std::string model_code(AggregationMethod method, Index min_user_ratings,
                       Index min_support) {
  const std::string users =
      min_user_ratings > 0 ? std::to_string(min_user_ratings) : "all";
  return method_code(method) + " " + users + " " + std::to_string(min_support);
}

void run_aggregate(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  const LoadedRatings loaded = load_and_filter(config);
  const PairwiseMatrix<double> Y = aggregate(loaded.ratings, config.method);

  io::write_id_map(config.output_dir / "items.map", loaded.item_ids);
  io::write_pairwise(config.output_dir / "pairwise.coo",
                     config.output_dir / "pairwise.support", Y);

  io::Metadata meta;
  base_metadata(meta, "aggregate", config);
  meta.set("num_voters_total", loaded.voters_total);
  meta.set("num_voters_used", loaded.voters_used);
  meta.set("num_items", Y.num_items());
  meta.set("pairwise_entries", Y.num_pairs());
  meta.set("pair_coverage",
           Y.possible_pairs() > 0
               ? static_cast<double>(Y.num_pairs()) /
                     static_cast<double>(Y.possible_pairs())
               : 0.0);
  io::write_metadata(config.output_dir / "run.meta", meta);
}

RankOutcome run_rank(const RunConfig& config) {
  fs::create_directories(config.output_dir);

  PairwiseMatrix<double> Y;
  std::vector<std::string> item_ids;
  Index voters_total = -1, voters_used = -1;
  if (config.input_is_pairwise) {
    item_ids = io::read_id_map(config.input / "items.map");
    Y = io::read_pairwise(config.input / "pairwise.coo",
                          config.input / "pairwise.support");
    if (static_cast<Index>(item_ids.size()) != Y.num_items()) {
      throw std::runtime_error("items.map does not match pairwise file");
    }
  } else {
    LoadedRatings loaded = load_and_filter(config);
    Y = aggregate(loaded.ratings, config.method);
    item_ids = std::move(loaded.item_ids);
    voters_total = loaded.voters_total;
    voters_used = loaded.voters_used;
  }

  const SampleSet<double> samples = filter_support(Y, config.min_support);
  if (samples.empty()) {
    throw DomainError("no pairwise entries have support >= " +
                      std::to_string(config.min_support) +
                      "; lower --min-support");
  }

  RankOutcome out;
  out.num_items = Y.num_items();
  out.num_constraints = samples.size();
  out.solved = svp_complete(samples, config.solver);
  out.scores = extract_scores(out.solved.factors);
  out.score_resid = score_residual(samples, out.scores);
  out.coh = coherence(out.scores, config.coherence_beta);
  out.ranking = rank_items(out.scores, item_ids);

  io::write_id_map(config.output_dir / "items.map", item_ids);
  io::write_samples(config.output_dir / "samples.coo", samples);
  io::write_factors(config.output_dir, out.solved.factors);
  io::write_ranking(config.output_dir / "ranking.csv", out.ranking);

  io::Metadata diag;
  diag.set("num_items", out.num_items);
  diag.set("num_constraints", out.num_constraints);
  diag.set("solver_residual", out.solved.final_residual());
  diag.set("solver_residual_relative", out.solved.residual_is_relative);
  diag.set("score_residual", out.score_resid.value);
  diag.set("score_residual_relative", out.score_resid.relative);
  diag.set("iterations", out.solved.iterations);
  diag.set("converged", out.solved.converged);
  diag.set("gap_flag", out.solved.gap_flag);
  diag.set("theta", out.coh.theta);
  diag.set("rho", out.coh.rho);
  diag.set("nu", out.coh.nu);
  diag.set("beta", out.coh.beta);
  diag.set("sample_bound", out.coh.sample_bound);
  diag.set("log_base", std::string("e"));
  io::write_metadata(config.output_dir / "diagnostics.meta", diag);

  io::Metadata meta;
  base_metadata(meta, "rank", config);
  if (voters_total >= 0) {
    meta.set("num_voters_total", voters_total);
    meta.set("num_voters_used", voters_used);
  }
  meta.set("num_items", out.num_items);
  meta.set("num_constraints", out.num_constraints);
  io::write_metadata(config.output_dir / "run.meta", meta);
  return out;
}

AnalyzeReport run_analyze(const RunConfig& config) {
  const SampleSet<double> samples = io::read_samples(config.input / "samples.coo");
  const LowRankFactors<double> factors = io::read_factors(config.input);
  if (factors.rows() != samples.num_items) {
    throw std::runtime_error("factors do not match samples.coo");
  }

  AnalyzeReport report;
  report.solver_resid = sample_residual(samples, factors);
  const ScoreVector<double> s = extract_scores(factors);
  report.score_resid = score_residual(samples, s);
  report.coh = coherence(s, config.coherence_beta);

  fs::create_directories(config.output_dir);
  io::Metadata meta;
  meta.set("command", std::string("analyze"));
  meta.set("input", config.input.string());
  meta.set("num_items", samples.num_items);
  meta.set("num_constraints", samples.size());
  meta.set("solver_residual", report.solver_resid.value);
  meta.set("solver_residual_relative", report.solver_resid.relative);
  meta.set("score_residual", report.score_resid.value);
  meta.set("score_residual_relative", report.score_resid.relative);
  meta.set("theta", report.coh.theta);
  meta.set("rho", report.coh.rho);
  meta.set("nu", report.coh.nu);
  meta.set("beta", report.coh.beta);
  meta.set("sample_bound", report.coh.sample_bound);
  meta.set("log_base", std::string("e"));
  io::write_metadata(config.output_dir / "analyze.meta", meta);
  return report;
}

void run_synth_recovery(const SynthRecoveryConfig& config) {
  fs::create_directories(config.output_dir);
  std::vector<Index> counts = config.sample_counts;
  if (counts.empty()) {
    const double nlogn =
        static_cast<double>(config.n) * std::log(static_cast<double>(config.n));
    for (int f = 1; f <= 7; ++f) {
      counts.push_back(static_cast<Index>(std::llround(f * nlogn)));
    }
  }

  std::ofstream trials = open_out(config.output_dir / "trials.csv");
  std::ofstream summary = open_out(config.output_dir / "summary.csv");
  trials << "noise_eps,num_samples,trial,converged,iterations,score_error,"
            "order_exact,success\n";
  summary << "noise_eps,num_samples,trials,nonconverged,success_fraction\n";

  std::uint64_t point = 0;
  for (double eps : config.noise_levels) {
    for (Index m : counts) {
      RecoveryTrialSpec spec;
      spec.n = config.n;
      spec.num_samples = m;
      spec.noise_eps = eps;
      spec.score_model = config.score_model;
      spec.trials = config.trials;
      spec.seed = trial_seed(config.seed, point++);
      const RecoveryResult res =
          recovery_trial(spec, config.solver, config.threads);
      for (std::size_t t = 0; t < res.trials.size(); ++t) {
        const auto& o = res.trials[t];
        trials << io::format_double(eps) << ',' << m << ',' << t << ','
               << (o.converged ? 1 : 0) << ',' << o.iterations << ','
               << io::format_double(o.score_error) << ','
               << (o.order_exact ? 1 : 0) << ',' << (o.success ? 1 : 0)
               << '\n';
      }
      summary << io::format_double(eps) << ',' << m << ',' << spec.trials
              << ',' << res.nonconverged << ','
              << io::format_double(res.success_fraction) << '\n';
    }
  }

  io::Metadata meta;
  meta.set("command", std::string("synth-recovery"));
  meta.set("n", config.n);
  meta.set("trials", config.trials);
  meta.set("score_model",
           std::string(config.score_model == ScoreModel::uniform_random
                           ? "uniform_random"
                           : "uniform_spaced"));
  meta.set("seed", static_cast<Index>(config.seed));
  meta.set("rank", config.solver.target_rank);
  meta.set("eta", config.solver.step_length);
  meta.set("tol", config.solver.tolerance);
  meta.set("max_iterations", config.solver.max_iterations);
  meta.set("sampling_unit",
           std::string("oriented entries; pairs = ceil(num_samples/2), "
                       "skew-closed"));
  io::write_metadata(config.output_dir / "run.meta", meta);
}

void run_synth_irt(const SynthIrtConfig& config) {
  fs::create_directories(config.output_dir);
  std::ofstream trials = open_out(config.output_dir / "trials.csv");
  std::ofstream summary = open_out(config.output_dir / "summary.csv");
  trials << "noise_eps,avg_ratings,trial,converged,items_unrated,tau_nn,"
            "tau_mean\n";
  summary << "noise_eps,avg_ratings,trials,tau_nn_q25,tau_nn_median,"
             "tau_nn_q75,tau_mean_q25,tau_mean_median,tau_mean_q75\n";

  std::uint64_t point = 0;
  for (double eps : config.noise_levels) {
    for (double avg : config.avg_ratings) {
      IRTSpec spec;
      spec.num_users = config.num_users;
      spec.num_items = config.num_items;
      spec.avg_ratings_per_user = avg;
      spec.noise_eps = eps;
      spec.trials = config.trials;
      spec.seed = trial_seed(config.seed, point++);
      const IRTComparison res =
          irt_comparison(spec, config.method, config.solver, config.threads);
      for (std::size_t t = 0; t < res.trials.size(); ++t) {
        const auto& o = res.trials[t];
        trials << io::format_double(eps) << ',' << io::format_double(avg)
               << ',' << t << ',' << (o.converged ? 1 : 0) << ','
               << o.items_unrated << ',' << io::format_double(o.tau_nn) << ','
               << io::format_double(o.tau_mean) << '\n';
      }
      summary << io::format_double(eps) << ',' << io::format_double(avg) << ','
              << spec.trials << ',' << io::format_double(res.tau_nn_q.q25)
              << ',' << io::format_double(res.tau_nn_q.median) << ','
              << io::format_double(res.tau_nn_q.q75) << ','
              << io::format_double(res.tau_mean_q.q25) << ','
              << io::format_double(res.tau_mean_q.median) << ','
              << io::format_double(res.tau_mean_q.q75) << '\n';
    }
  }

  io::Metadata meta;
  meta.set("command", std::string("synth-irt"));
  meta.set("num_users", config.num_users);
  meta.set("num_items", config.num_items);
  meta.set("method", method_code(config.method));
  meta.set("trials", config.trials);
  meta.set("seed", static_cast<Index>(config.seed));
  meta.set("rank", config.solver.target_rank);
  meta.set("eta", config.solver.step_length);
  meta.set("tol", config.solver.tolerance);
  meta.set("max_iterations", config.solver.max_iterations);
  meta.set("rating_presence",
           std::string("independent inclusion with probability "
                       "avg_ratings_per_user / num_items"));
  io::write_metadata(config.output_dir / "run.meta", meta);
}

}  // namespace skewrank
