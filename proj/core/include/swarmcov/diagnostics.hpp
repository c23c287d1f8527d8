#pragma once

#include "swarmcov/grid.hpp"
#include "swarmcov/meanfield.hpp"
#include "swarmcov/pde_oracle.hpp"
#include "swarmcov/sde.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace swarmcov {

/// sum_cells |rho - target| * cell volume.
double l1_distance(const GridField& rho, const GridField& target);

/// counts / (n_total * cell volume). Points outside the grid go to the nearest
/// boundary cell and are reported through `clamped`.
GridField histogram_density(std::span<const Point> positions, const Grid& grid, std::size_t n_total,
                            std::size_t* clamped = nullptr);

/// Kernel density estimate sampled at cell centres.
GridField kde_density_on_grid(const KdeIndex& index, const Grid& grid);

double moving_fraction(const SwarmState& state);

/// Columns of metrics.csv, in file order.
struct MetricsRow {
  double t = 0.0;
  double l1_to_target = 0.0;
  double moving_fraction = 0.0;
  double total_mass = 0.0;
};

struct ParticleSnapshot {
  double t = 0.0;
  std::int64_t step = 0;
  std::vector<Point> positions;
  std::vector<MotionState> states;
};

struct FieldSnapshot {
  double t = 0.0;
  std::int64_t step = 0;
  GridField moving;
  GridField motionless;
};

struct RunRecord {
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json summary = nlohmann::json::object();
  std::vector<ParticleSnapshot> particles;
  std::vector<FieldSnapshot> fields;
  GridField target;  // target on the metrics grid, exported with field snapshots
  std::vector<MetricsRow> metrics;
};

enum class ExportFormat { Csv, JsonLines };

/// %.17g, enough digits for doubles to round-trip exactly.
std::string format_double(double value);

/// Writes snapshots (snapshots_<step>.csv or snapshots.jsonl; fields_<step>.csv or
/// fields.jsonl for grid runs), metrics.csv and run.json into `dir`.
void export_run(const RunRecord& record, const std::filesystem::path& dir, ExportFormat format);

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

inline constexpr const char* kMetricsHeader = "t,l1_to_target,moving_fraction,total_mass";
inline constexpr const char* kSnapshotHeader = "t,particle_id,x1,x2,x3,motion_state";
inline constexpr const char* kFieldHeader = "t,cell_id,x1,x2,x3,y1,y2,target";

/// Snapshot sink for particle runs: computes metrics on `grid` and optionally keeps positions.
/// In switching runs the L1 metric compares Motionless agents with the target; otherwise all agents.
class ParticleRecorder {
 public:
  ParticleRecorder(Grid grid, GridField target_on_grid, bool switching, bool keep_positions);

  void operator()(const SwarmState& state);
  RunRecord& record() { return record_; }
  const RunRecord& record() const { return record_; }
  std::size_t clamped_points() const { return clamped_; }

 private:
  Grid grid_;
  bool switching_;
  bool keep_positions_;
  std::size_t clamped_ = 0;
  RunRecord record_;
};

/// Snapshot sink for PDE oracle runs. Linear runs compare y1 with the target, semilinear runs y2.
class FieldRecorder {
 public:
  FieldRecorder(GridField target, bool compare_moving, bool keep_fields);

  void operator()(const OracleSnapshot& snap);
  RunRecord& record() { return record_; }
  const RunRecord& record() const { return record_; }

 private:
  bool compare_moving_;
  bool keep_fields_;
  RunRecord record_;
};

}  // namespace swarmcov
