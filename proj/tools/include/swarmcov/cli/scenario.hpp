#pragma once

#include "swarmcov/diagnostics.hpp"
#include "swarmcov/sde.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swarmcov::cli {

struct DomainSpec {
  std::string kind = "box";  // box | sphere
  std::vector<double> lo{0.0, 0.0, 0.0};
  std::vector<double> hi{1.0, 1.0, 1.0};
};

struct ControlSpec {
  std::string variant = "switching";  // noninteracting | gradient_drift | switching | constant
  double D = 1.0;
  double k = 1.0;
  double epsilon = 0.1;
  std::string density_source = "motionless";  // motionless | all
  double q_max = kDefaultRateCap;
  /// "absolute", "domain" or a positive number: the reference volume densities are scaled by.
  std::string density_scale = "absolute";
  std::vector<double> u;
  std::vector<double> v;
};

struct TargetSpec {
  /// uniform | balls8 | balls8+floor | balls | sphere-caps | sinusoid | grid
  std::string kind = "uniform";
  double floor = 0.001;
  std::optional<double> radius;
  std::string profile = "flat";  // flat | raised-cosine
  std::vector<std::vector<double>> centers;
  double threshold = 0.75;
  double amplitude = 0.5;
  int wavenumber = 1;
  std::string file;
  std::vector<int> cells;
};

struct InitialSpec {
  std::string kind = "uniform";  // uniform | region
  std::vector<double> lo;
  std::vector<double> hi;
};

struct SimSpec {
  double dt = 0.01;
  double t_final = 1.0;
  std::int64_t n_particles = 1;
  std::uint64_t seed = 1;
  int substeps = 4;
  std::int64_t snapshot_every = 100;
  std::string integrator = "auto";  // auto | heun | exact
};

struct OutputSpec {
  std::string dir;
  std::string format = "csv";  // csv | jsonl
  int metrics_cells = 10;
  bool snapshots = true;
};

struct OracleSpec {
  std::string kind = "linear";  // linear | semilinear
  std::vector<int> cells{100};
  double dt = 0.0;              // 0 picks 0.9 of the stability bound
  double t_final = 1.0;
  std::int64_t snapshot_every = 100;
  double b = 1.0;
  std::string initial = "uniform";  // uniform | target
};

struct Scenario {
  std::string name = "scenario";
  DomainSpec domain;
  std::string fields = "brockett";  // brockett | sphere | coordinate
  ControlSpec control;
  TargetSpec target;
  InitialSpec initial;
  SimSpec sim;
  OutputSpec output;
  std::optional<OracleSpec> oracle;
  /// Directory relative file references are resolved against.
  std::filesystem::path base_dir;
};

/// Parses YAML text. Schema violations raise ConfigError naming the offending field path.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical YAML form; parse_scenario(serialize_scenario(s)) reproduces s.
std::string serialize_scenario(const Scenario& scenario);
nlohmann::json scenario_json(const Scenario& scenario);

// Builders. All raise ConfigError for inconsistent combinations.
Domain build_domain(const Scenario& s);
FieldFamily build_family(const Scenario& s);
std::shared_ptr<const TargetDensity> build_target(const Scenario& s, const Domain& domain);
ControlLaw build_law(const Scenario& s, const Domain& domain, std::shared_ptr<const TargetDensity> target,
                     std::size_t n_fields);
SimConfig build_sim_config(const Scenario& s, int threads);
SwarmState build_initial(const Scenario& s, const Domain& domain);
Grid build_metrics_grid(const Scenario& s, const Domain& domain);

/// Reads a custom target grid file: CSV with header "cell_id,value".
std::vector<double> read_grid_file(const std::filesystem::path& path);

}  // namespace swarmcov::cli
