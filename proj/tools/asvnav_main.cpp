#include <string>

#include <CLI11.hpp>

#include "asvnav/cli.hpp"

namespace cli = asvnav::cli;

int main(int argc, char** argv) {
  CLI::App app{"Marine state-estimation benchmark (invariant EKF vs MEKF)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string log_path;
  cli::CliOptions opts;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
    sub->add_option("--seed", opts.seed, "base RNG seed (overrides config)");
    sub->add_option("--runs", opts.runs, "number of runs (overrides config)");
    sub->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* montecarlo = app.add_subcommand(
      "montecarlo", "Accuracy study: per-run error metrics and a summary table");
  add_common(montecarlo);

  CLI::App* convergence = app.add_subcommand(
      "convergence", "Convergence study: early error trajectories and divergence "
                     "counts");
  add_common(convergence);

  CLI::App* replay = app.add_subcommand(
      "replay", "Run one filter over a recorded sensor log");
  replay->add_option("--log", log_path, "sensor log CSV")->required();
  add_common(replay);

  CLI11_PARSE(app, argc, argv);

  if (montecarlo->parsed()) return cli::cmd_montecarlo(config_path, opts);
  if (convergence->parsed()) return cli::cmd_convergence(config_path, opts);
  return cli::cmd_replay(log_path, config_path, opts);
}
