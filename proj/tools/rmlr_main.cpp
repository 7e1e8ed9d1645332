// Command-line harness: subspace-bench, pipeline-bench, moments-check.
//
// Exit codes: 0 success, 1 failed diagnostic check or unexpected error,
// 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rmlr/bench/config.hpp"
#include "rmlr/bench/experiments.hpp"
#include "rmlr/bench/output.hpp"
#include "rmlr/errors.hpp"
#include "rmlr/version.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::optional<int> seeds;
  std::optional<int> threads;
  std::optional<std::uint64_t> master_seed;
  bool timing = false;
  bool no_plots = false;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "Output directory (overrides the config's \"output\")");
  cmd->add_option("--seeds", args.seeds, "Number of seeds per alpha")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", args.threads, "Worker threads, 0 = all cores (default: $RMLR_THREADS or 1)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", args.master_seed, "Master seed (overrides the config)");
  cmd->add_flag("--timing", args.timing, "Record wall-clock times in results.csv");
  cmd->add_flag("--no-plots", args.no_plots, "Skip SVG rendering");
}

rmlr::bench::ExperimentConfig resolve(const Args& args, rmlr::bench::Experiment expected) {
  rmlr::bench::ExperimentConfig cfg = rmlr::bench::load_config(args.config);
  if (cfg.experiment != expected) {
    throw rmlr::ConfigError(std::string("experiment: this subcommand runs '") + rmlr::bench::to_string(expected) +
                            "' but the config declares '" + rmlr::bench::to_string(cfg.experiment) + "'");
  }
  if (args.seeds) cfg.seeds = *args.seeds;
  if (args.threads) cfg.threads = *args.threads;
  if (args.master_seed) cfg.master_seed = *args.master_seed;
  if (args.timing) cfg.timing = true;
  if (args.no_plots) cfg.plots = false;
  if (!args.out.empty()) cfg.output = args.out;
  if (cfg.output.empty()) throw rmlr::ConfigError("output: no output directory given (use --out)");
  for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  return cfg;
}

int run(const std::string& command, const Args& args) {
  using namespace rmlr::bench;
  if (command == "subspace-bench") {
    const ExperimentConfig cfg = resolve(args, Experiment::subspace);
    emit_outputs(run_subspace_bench(cfg), cfg.output, cfg, {cfg.plots, cfg.timing});
    return 0;
  }
  if (command == "pipeline-bench") {
    const ExperimentConfig cfg = resolve(args, Experiment::pipeline);
    emit_outputs(run_pipeline_bench(cfg), cfg.output, cfg, {cfg.plots, cfg.timing});
    return 0;
  }
  const ExperimentConfig cfg = resolve(args, Experiment::moments);
  const MomentsReport report = run_moments_check(cfg);
  emit_outputs(report.records, cfg.output, cfg, {cfg.plots, cfg.timing});
  for (const CheckOutcome& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << format_double(c.statistic)
              << " (limit " << format_double(c.limit) << ")\n";
  }
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust meta-learning for mixed linear regression: experiment harness"};
  app.set_version_flag("--version", RMLR_VERSION);
  app.require_subcommand(1);
  Args args;
  for (const char* name : {"subspace-bench", "pipeline-bench", "moments-check"}) {
    add_common(app.add_subcommand(name, std::string("Run the ") + name + " experiment"), args);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, args);
  } catch (const rmlr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const rmlr::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
