#pragma once

#include "swarmcov/cli/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace swarmcov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutDirEnv = "SWARMCOV_OUT_DIR";

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int threads = 0;  // 0: available parallelism
  bool verbose = false;
  std::string inject_fault;
};

/// --out, then output.dir, then $SWARMCOV_OUT_DIR/<name>, then ./out/<name>.
std::filesystem::path resolve_output_dir(const Scenario& scenario, const CommandOptions& opts);

struct RunOutcome {
  RunRecord record;
  SwarmState final_state;
  double wall_seconds = 0.0;
};

/// Runs the particle simulation of a parsed scenario without writing files.
RunOutcome simulate(const Scenario& scenario, const CommandOptions& opts);
/// Runs the grid oracle of a parsed scenario without writing files.
RunOutcome solve_oracle(const Scenario& scenario, const CommandOptions& opts);

// Entry points; each maps failures to exit codes and reports them on `err`.
int cmd_run(const std::filesystem::path& scenario_path, const CommandOptions& opts, std::ostream& out,
            std::ostream& err);
int cmd_oracle(const std::filesystem::path& scenario_path, const CommandOptions& opts, std::ostream& out,
               std::ostream& err);
int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err);

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct VerifyOptions {
  /// Test fixture: negate every numeric bracket the suite computes.
  bool flip_bracket_sign = false;
};

std::vector<CheckResult> run_verify_suite(const VerifyOptions& opts);

}  // namespace swarmcov::cli
