#include "swarmcov/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace swarmcov {

namespace fs = std::filesystem;

double l1_distance(const GridField& rho, const GridField& target) {
  if (!(rho.grid == target.grid)) throw UsageError("l1_distance: fields live on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) sum += std::abs(rho.values[i] - target.values[i]);
  return sum * rho.grid.cell_volume();
}

GridField histogram_density(std::span<const Point> positions, const Grid& grid, std::size_t n_total,
                            std::size_t* clamped) {
  if (n_total == 0) throw UsageError("histogram_density: n_total must be positive");
  std::vector<std::size_t> counts(grid.size(), 0);
  std::size_t outside = 0;
  for (const auto& p : positions) {
    bool was_clamped = false;
    ++counts[grid.locate_clamped(p, &was_clamped)];
    if (was_clamped) ++outside;
  }
  if (clamped) *clamped = outside;
  GridField out(grid);
  const double norm = 1.0 / (static_cast<double>(n_total) * grid.cell_volume());
  for (std::size_t i = 0; i < counts.size(); ++i) out.values[i] = static_cast<double>(counts[i]) * norm;
  return out;
}

GridField kde_density_on_grid(const KdeIndex& index, const Grid& grid) {
  GridField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = index.density(grid.cell_center(i));
  return out;
}

double moving_fraction(const SwarmState& state) {
  if (state.size() == 0) return 0.0;
  return static_cast<double>(state.moving_count()) / static_cast<double>(state.size());
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(const std::ofstream& out, const fs::path& path) {
  if (!out) throw DomainError("failed writing '" + path.string() + "'");
}

std::string step_tag(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%09lld", static_cast<long long>(step));
  return buf;
}

void write_xyz(std::ostream& out, const Point& p) {
  for (int a = 0; a < 3; ++a) {
    out << ',' << format_double(a < p.size() ? p[a] : 0.0);
  }
}

void write_particle_csv(const ParticleSnapshot& snap, const fs::path& path) {
  auto out = open_for_write(path);
  out << kSnapshotHeader << '\n';
  const std::string t = format_double(snap.t);
  for (std::size_t j = 0; j < snap.positions.size(); ++j) {
    out << t << ',' << j;
    write_xyz(out, snap.positions[j]);
    out << ',' << static_cast<int>(snap.states[j]) << '\n';
  }
  check_written(out, path);
}

void write_field_csv(const FieldSnapshot& snap, const GridField& target, const fs::path& path) {
  auto out = open_for_write(path);
  out << kFieldHeader << '\n';
  const std::string t = format_double(snap.t);
  const Grid& g = snap.moving.grid;
  const bool has_target = target.grid == g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << t << ',' << i;
    write_xyz(out, g.cell_center(i));
    out << ',' << format_double(snap.moving.values[i]) << ',' << format_double(snap.motionless.values[i]) << ','
        << format_double(has_target ? target.values[i] : 0.0) << '\n';
  }
  check_written(out, path);
}

nlohmann::json point_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

}  // namespace

void export_run(const RunRecord& record, const fs::path& dir, ExportFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DomainError("cannot create output directory '" + dir.string() + "': " + ec.message());

  if (format == ExportFormat::Csv) {
    for (const auto& snap : record.particles) {
      write_particle_csv(snap, dir / ("snapshots_" + step_tag(snap.step) + ".csv"));
    }
    for (const auto& snap : record.fields) {
      write_field_csv(snap, record.target, dir / ("fields_" + step_tag(snap.step) + ".csv"));
    }
  } else {
    if (!record.particles.empty()) {
      const fs::path path = dir / "snapshots.jsonl";
      auto out = open_for_write(path);
      for (const auto& snap : record.particles) {
        nlohmann::json line{{"t", snap.t}, {"step", snap.step}};
        auto& pos = line["positions"] = nlohmann::json::array();
        auto& st = line["motion_state"] = nlohmann::json::array();
        for (std::size_t j = 0; j < snap.positions.size(); ++j) {
          pos.push_back(point_json(snap.positions[j]));
          st.push_back(static_cast<int>(snap.states[j]));
        }
        out << line.dump() << '\n';
      }
      check_written(out, path);
    }
    if (!record.fields.empty()) {
      const fs::path path = dir / "fields.jsonl";
      auto out = open_for_write(path);
      for (const auto& snap : record.fields) {
        nlohmann::json line{{"t", snap.t}, {"step", snap.step}, {"y1", snap.moving.values},
                            {"y2", snap.motionless.values}};
        out << line.dump() << '\n';
      }
      check_written(out, path);
    }
  }

  {
    const fs::path path = dir / "metrics.csv";
    auto out = open_for_write(path);
    out << kMetricsHeader << '\n';
    for (const auto& row : record.metrics) {
      out << format_double(row.t) << ',' << format_double(row.l1_to_target) << ','
          << format_double(row.moving_fraction) << ',' << format_double(row.total_mass) << '\n';
    }
    check_written(out, path);
  }
  {
    const fs::path path = dir / "run.json";
    auto out = open_for_write(path);
    nlohmann::json run{{"config", record.config},
                       {"summary", record.summary},
                       {"provenance", {{"code_version", SWARMCOV_VERSION}}}};
    if (record.config.contains("sim") && record.config["sim"].contains("seed")) {
      run["provenance"]["seed"] = record.config["sim"]["seed"];
    }
    out << run.dump(2) << '\n';
    check_written(out, path);
  }
}

std::vector<MetricsRow> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw DomainError("'" + path.string() + "' does not start with the metrics header");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    double v[4];
    int n = 0;
    while (n < 4 && std::getline(fields, cell, ',')) {
      try {
        v[n++] = std::stod(cell);
      } catch (const std::exception&) {
        throw DomainError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (n != 4) throw DomainError(path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    rows.push_back({v[0], v[1], v[2], v[3]});
  }
  return rows;
}

ParticleRecorder::ParticleRecorder(Grid grid, GridField target_on_grid, bool switching, bool keep_positions)
    : grid_(std::move(grid)), switching_(switching), keep_positions_(keep_positions) {
  if (!(target_on_grid.grid == grid_)) throw UsageError("recorder target lives on a different grid");
  record_.target = std::move(target_on_grid);
}

void ParticleRecorder::operator()(const SwarmState& state) {
  std::size_t clamped = 0;
  const GridField all = histogram_density(state.positions, grid_, state.size(), &clamped);
  clamped_ += clamped;
  if (clamped > 0) {
    std::cerr << "warning: " << clamped << " particle(s) outside the metrics grid at t=" << state.time
              << " were binned into boundary cells\n";
  }
  double l1 = 0.0;
  if (switching_) {
    std::vector<Point> still;
    for (std::size_t j = 0; j < state.size(); ++j) {
      if (state.states[j] == MotionState::Motionless) still.push_back(state.positions[j]);
    }
    l1 = l1_distance(histogram_density(still, grid_, state.size()), record_.target);
  } else {
    l1 = l1_distance(all, record_.target);
  }
  record_.metrics.push_back({state.time, l1, moving_fraction(state), all.mass()});
  if (keep_positions_) record_.particles.push_back({state.time, state.step, state.positions, state.states});
}

FieldRecorder::FieldRecorder(GridField target, bool compare_moving, bool keep_fields)
    : compare_moving_(compare_moving), keep_fields_(keep_fields) {
  record_.target = std::move(target);
}

void FieldRecorder::operator()(const OracleSnapshot& snap) {
  const TwoStateField& f = *snap.fields;
  const double m1 = f.moving.mass();
  const double total = m1 + f.motionless.mass();
  const double l1 = l1_distance(compare_moving_ ? f.moving : f.motionless, record_.target);
  record_.metrics.push_back({snap.time, l1, total > 0.0 ? m1 / total : 0.0, total});
  if (keep_fields_) record_.fields.push_back({snap.time, snap.step, f.moving, f.motionless});
}

}  // namespace swarmcov
