// skewrank: rank aggregation from sparse ratings via skew-symmetric
// matrix completion.
//
// Exit codes: 0 ok, 2 usage, 3 malformed input, 4 domain error,
// 5 solver did not converge, 1 anything else.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "skewrank/pipeline.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitDomain = 4;
constexpr int kExitNoConvergence = 5;

struct CommonOptions {
  std::string method = "am";
  skewrank::RunConfig config;
  std::string input;
  std::string output_dir;
  std::string delimiter = ",";
};

void add_solver_options(CLI::App* cmd, skewrank::SolverConfig<double>& solver) {
  cmd->add_option("--rank", solver.target_rank, "Completion rank (even)")
      ->capture_default_str();
  cmd->add_option("--eta", solver.step_length, "Gradient step length")
      ->capture_default_str();
  cmd->add_option("--tol", solver.tolerance,
                  "Stop when the relative residual falls below this")
      ->capture_default_str();
  cmd->add_option("--max-iters", solver.max_iterations,
                  "Iteration budget for the solver")
      ->capture_default_str();
}

void add_common_options(CLI::App* cmd, CommonOptions& opts, bool needs_method) {
  cmd->add_option("--input", opts.input, "Input path")->required();
  cmd->add_option("--output-dir", opts.output_dir, "Output directory")
      ->required();
  if (needs_method) {
    cmd->add_option("--method", opts.method,
                    "Aggregation method: am, gm, bc, sb or lo")
        ->capture_default_str();
    cmd->add_option("--min-user-ratings", opts.config.min_user_ratings,
                    "Drop voters with fewer ratings")
        ->capture_default_str();
    cmd->add_option("--min-support", opts.config.min_support,
                    "Drop pairwise entries with fewer comparisons")
        ->capture_default_str();
    cmd->add_option("--delimiter", opts.delimiter,
                    "Field delimiter of the ratings file")
        ->capture_default_str();
  }
  cmd->add_option("--seed", opts.config.seed, "Random seed recorded in run.meta")
      ->capture_default_str();
  cmd->add_option("--beta", opts.config.coherence_beta,
                  "Confidence parameter of the coherence report")
      ->capture_default_str();
}

skewrank::RunConfig finish_config(const CommonOptions& opts) {
  skewrank::RunConfig config = opts.config;
  const auto method = skewrank::parse_method_code(opts.method);
  if (!method) {
    throw skewrank::DomainError("unknown method code '" + opts.method +
                                "' (expected am, gm, bc, sb or lo)");
  }
  config.method = *method;
  config.input = opts.input;
  config.output_dir = opts.output_dir;
  if (opts.delimiter.size() != 1) {
    throw skewrank::DomainError("--delimiter must be a single character");
  }
  config.delimiter = opts.delimiter[0];
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank aggregation via skew-symmetric matrix completion"};
  app.require_subcommand(1);

  CommonOptions agg_opts;
  CLI::App* agg = app.add_subcommand(
      "aggregate", "Build the pairwise comparison matrix from ratings");
  add_common_options(agg, agg_opts, true);

  CommonOptions rank_opts;
  bool from_pairwise = false;
  CLI::App* rank = app.add_subcommand(
      "rank", "Aggregate, complete and rank; the full pipeline");
  add_common_options(rank, rank_opts, true);
  add_solver_options(rank, rank_opts.config.solver);
  rank->add_flag("--from-pairwise", from_pairwise,
                 "Treat --input as an aggregate output directory");

  CommonOptions an_opts;
  CLI::App* an = app.add_subcommand(
      "analyze", "Recompute residuals and coherence of a rank output");
  add_common_options(an, an_opts, false);

  skewrank::SynthRecoveryConfig rec;
  std::string rec_out, rec_model = "uniform_random";
  std::vector<skewrank::Index> rec_samples;
  std::vector<double> rec_noise;
  CLI::App* synth_rec = app.add_subcommand(
      "synth-recovery", "Score-vector recovery study on synthetic data");
  synth_rec->add_option("--n", rec.n, "Number of items")->capture_default_str();
  synth_rec->add_option("--samples", rec_samples,
                        "Sampled oriented entries per sweep point "
                        "(default 1..7 times n ln n)");
  synth_rec->add_option("--noise", rec_noise, "Noise levels (default 0)");
  synth_rec
      ->add_option("--score-model", rec_model,
                   "uniform_random or uniform_spaced")
      ->capture_default_str();
  synth_rec->add_option("--trials", rec.trials, "Trials per sweep point")
      ->capture_default_str();
  synth_rec->add_option("--seed", rec.seed, "Master seed")->capture_default_str();
  synth_rec->add_option("--threads", rec.threads, "Worker threads (0 = all)")
      ->capture_default_str();
  synth_rec->add_option("--output-dir", rec_out, "Output directory")->required();
  add_solver_options(synth_rec, rec.solver);

  skewrank::SynthIrtConfig irt;
  std::string irt_out, irt_method = "am";
  std::vector<double> irt_avg, irt_noise;
  CLI::App* synth_irt = app.add_subcommand(
      "synth-irt", "Item-response comparison against mean ratings");
  synth_irt->add_option("--users", irt.num_users, "Number of users")
      ->capture_default_str();
  synth_irt->add_option("--items", irt.num_items, "Number of items")
      ->capture_default_str();
  synth_irt->add_option("--avg-ratings", irt_avg,
                        "Average ratings per user (default 5)");
  synth_irt->add_option("--noise", irt_noise,
                        "Noise levels (default 0 0.25 0.5 0.75 1)");
  synth_irt->add_option("--method", irt_method, "Aggregation method code")
      ->capture_default_str();
  synth_irt->add_option("--trials", irt.trials, "Trials per sweep point")
      ->capture_default_str();
  synth_irt->add_option("--seed", irt.seed, "Master seed")->capture_default_str();
  synth_irt->add_option("--threads", irt.threads, "Worker threads (0 = all)")
      ->capture_default_str();
  synth_irt->add_option("--output-dir", irt_out, "Output directory")->required();
  add_solver_options(synth_irt, irt.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (agg->parsed()) {
      skewrank::run_aggregate(finish_config(agg_opts));
      std::cout << "wrote pairwise matrix to " << agg_opts.output_dir << "\n";
    } else if (rank->parsed()) {
      skewrank::RunConfig config = finish_config(rank_opts);
      config.input_is_pairwise = from_pairwise;
      const skewrank::RankOutcome out = skewrank::run_rank(config);
      std::cout << "ranked " << out.num_items << " items from "
                << out.num_constraints << " constraints; solver residual "
                << skewrank::io::format_double(out.solved.final_residual())
                << " after " << out.solved.iterations << " iterations\n"
                << "wrote ranking to " << rank_opts.output_dir << "\n";
      if (!out.solved.converged) {
        std::cerr << "warning: solver did not reach tolerance "
                  << skewrank::io::format_double(config.solver.tolerance)
                  << " within " << config.solver.max_iterations
                  << " iterations\n";
        return kExitNoConvergence;
      }
    } else if (an->parsed()) {
      skewrank::RunConfig config = an_opts.config;
      config.input = an_opts.input;
      config.output_dir = an_opts.output_dir;
      const skewrank::AnalyzeReport report = skewrank::run_analyze(config);
      std::cout << "solver residual "
                << skewrank::io::format_double(report.solver_resid.value)
                << ", score residual "
                << skewrank::io::format_double(report.score_resid.value)
                << ", nu " << skewrank::io::format_double(report.coh.nu)
                << "\n";
    } else if (synth_rec->parsed()) {
      if (!rec_samples.empty()) rec.sample_counts = rec_samples;
      if (!rec_noise.empty()) rec.noise_levels = rec_noise;
      if (rec_model == "uniform_random") {
        rec.score_model = skewrank::ScoreModel::uniform_random;
      } else if (rec_model == "uniform_spaced") {
        rec.score_model = skewrank::ScoreModel::uniform_spaced;
      } else {
        throw skewrank::DomainError("unknown score model '" + rec_model + "'");
      }
      rec.output_dir = rec_out;
      skewrank::run_synth_recovery(rec);
      std::cout << "wrote recovery sweep to " << rec_out << "\n";
    } else if (synth_irt->parsed()) {
      if (!irt_avg.empty()) irt.avg_ratings = irt_avg;
      if (!irt_noise.empty()) irt.noise_levels = irt_noise;
      const auto method = skewrank::parse_method_code(irt_method);
      if (!method) {
        throw skewrank::DomainError("unknown method code '" + irt_method + "'");
      }
      irt.method = *method;
      irt.output_dir = irt_out;
      skewrank::run_synth_irt(irt);
      std::cout << "wrote item-response sweep to " << irt_out << "\n";
    }
  } catch (const skewrank::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const skewrank::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
