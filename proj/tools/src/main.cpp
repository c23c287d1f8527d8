#include "swarmcov/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace swarmcov::cli;

  CLI::App app{"swarmcov: swarm density stabilization by switching diffusions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SWARMCOV_VERSION);

  CommandOptions opts;
  std::uint64_t seed = 0;
  std::string out;
  std::string scenario;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", opts.threads, "worker threads (0 = available parallelism)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("-v,--verbose", opts.verbose, "more detail");
  };

  auto* run = app.add_subcommand("run", "run a particle simulation scenario");
  run->add_option("scenario", scenario, "scenario YAML file")->required();
  run->add_option("--seed", seed, "override sim.seed");
  run->add_option("--out", out, std::string("output directory (default: output.dir, then $") + kOutDirEnv + ")");
  add_common(run);

  auto* oracle = app.add_subcommand("oracle", "run the grid PDE oracle of a scenario");
  oracle->add_option("scenario", scenario, "scenario YAML file")->required();
  oracle->add_option("--out", out, "output directory");
  add_common(oracle);

  auto* verify = app.add_subcommand("verify", "run the built-in invariant suite");
  verify->add_option("--inject-fault", opts.inject_fault, "deliberately break a check (bracket-sign)");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (run->count("--seed")) opts.seed = seed;
  if (!out.empty()) opts.out = out;

  if (*run) return cmd_run(scenario, opts, std::cout, std::cerr);
  if (*oracle) return cmd_oracle(scenario, opts, std::cout, std::cerr);
  return cmd_verify(opts, std::cout, std::cerr);
}
