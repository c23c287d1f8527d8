#include "swarmcov/cli/commands.hpp"

#include "swarmcov/pde_oracle.hpp"
#include "swarmcov/target.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <ostream>

namespace swarmcov::cli {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const Scenario& s, const CommandOptions& opts) {
  if (opts.out) return *opts.out;
  if (!s.output.dir.empty()) return s.output.dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return fs::path(env) / s.name;
  return fs::path("out") / s.name;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Scenario with_overrides(Scenario s, const CommandOptions& opts) {
  if (opts.seed) s.sim.seed = *opts.seed;
  return s;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitDomain;
  }
}

ExportFormat export_format(const Scenario& s) {
  return s.output.format == "jsonl" ? ExportFormat::JsonLines : ExportFormat::Csv;
}

}  // namespace

RunOutcome simulate(const Scenario& scenario, const CommandOptions& opts) {
  const Scenario s = with_overrides(scenario, opts);
  const Domain domain = build_domain(s);
  const FieldFamily family = build_family(s);
  auto target = build_target(s, domain);
  const ControlLaw law = build_law(s, domain, target, family.size());
  const SimConfig cfg = build_sim_config(s, opts.threads);
  SwarmState initial = build_initial(s, domain);

  const Grid grid = build_metrics_grid(s, domain);
  GridField projected = project_target(*target, grid);
  ParticleRecorder recorder(grid, projected, law.is_switching(), s.output.snapshots);

  const auto t0 = Clock::now();
  RunOutcome outcome;
  outcome.final_state = run(cfg, law, family, domain, std::move(initial),
                            [&recorder](const SwarmState& st) { recorder(st); });
  outcome.wall_seconds = seconds_since(t0);
  outcome.record = std::move(recorder.record());

  // KDE-on-grid estimate of the same L1 distance, reported alongside the histogram one.
  const Kernel kernel = law.is_switching() ? law.kernel
                        : std::holds_alternative<SphereDomain>(domain)
                            ? Kernel::sphere(s.control.epsilon)
                            : Kernel::euclidean(s.control.epsilon, ambient_dim(domain));
  std::vector<Point> contributing;
  for (std::size_t j = 0; j < outcome.final_state.size(); ++j) {
    if (!law.is_switching() || outcome.final_state.states[j] == MotionState::Motionless) {
      contributing.push_back(outcome.final_state.positions[j]);
    }
  }
  const KdeIndex index(kernel, domain, contributing, outcome.final_state.size());
  const double kde_l1 = l1_distance(kde_density_on_grid(index, grid), projected);

  const auto& last = outcome.record.metrics.back();
  auto& rec = outcome.record;
  rec.config = scenario_json(s);
  rec.summary = {{"final_l1_histogram", last.l1_to_target},
                 {"final_l1_kde", kde_l1},
                 {"initial_l1_histogram", rec.metrics.front().l1_to_target},
                 {"final_moving_fraction", last.moving_fraction},
                 {"final_moving_count", outcome.final_state.moving_count()},
                 {"n_particles", outcome.final_state.size()},
                 {"steps", outcome.final_state.step},
                 {"integrator", resolve_integrator(cfg.integrator, law, family) == Integrator::ExactFlow ? "exact"
                                                                                                        : "heun"},
                 {"density_scale", law.density_scale},
                 {"target_normalization", target->normalization()},
                 {"target_quadrature_mass", target->quadrature_mass()},
                 {"kernel_normalization", kernel.normalization()},
                 {"metrics_grid_cells", grid.size()}};
  return outcome;
}

RunOutcome solve_oracle(const Scenario& scenario, const CommandOptions& opts) {
  const Scenario s = with_overrides(scenario, opts);
  if (!s.oracle) throw ConfigError("oracle: section is required for the oracle command");
  const OracleSpec& q = *s.oracle;
  const Domain domain = build_domain(s);
  const auto* box = std::get_if<BoxDomain>(&domain);
  if (!box || box->dim() > 2) throw ConfigError("domain: the oracle runs on 1-D or 2-D boxes");
  if (static_cast<int>(q.cells.size()) != box->dim()) throw ConfigError("oracle.cells: one entry per domain axis");
  if (s.target.kind == "grid" && s.target.cells != q.cells) {
    throw ConfigError("target.cells: grid file resolution does not match oracle.cells");
  }
  const Grid grid = Grid::box(*box, q.cells);
  auto target = build_target(s, domain);
  GridField yd = project_target(*target, grid);
  const double yd_mass = yd.mass();
  for (double& v : yd.values) v /= yd_mass;

  RunOutcome outcome;
  const auto t0 = Clock::now();
  const double uniform = 1.0 / box->volume();
  double dt = q.dt;
  if (q.kind == "linear") {
    if (yd.min() <= 0.0) throw ConfigError("target: the linear oracle needs a strictly positive target");
    const auto coef = CoefficientPair::for_equilibrium(yd, q.b);
    if (dt == 0.0) dt = 0.9 * linear_stability_bound(coef);
    FieldRecorder recorder(yd, true, s.output.snapshots);
    GridField y0 = q.initial == "target" ? yd : GridField(grid, uniform);
    auto final_fields = run_linear(std::move(y0), coef, dt, q.t_final, q.snapshot_every,
                                   [&recorder](const OracleSnapshot& snap) { recorder(snap); });
    outcome.record = std::move(recorder.record());
  } else {
    const ReactionFunctions reactions{s.control.k, s.control.q_max};
    const auto diffusion = CoefficientPair::laplacian(grid, s.control.D);
    TwoStateField y0{GridField(grid, 0.0), GridField(grid, 0.0)};
    if (q.initial == "target") {
      y0.motionless = yd;
    } else {
      y0.moving = GridField(grid, uniform);
    }
    if (dt == 0.0) {
      const double ymax = std::max({*std::max_element(yd.values.begin(), yd.values.end()), uniform});
      dt = 0.9 * std::min(linear_stability_bound(diffusion), 0.5 / (reactions.k * ymax));
    }
    FieldRecorder recorder(yd, false, s.output.snapshots);
    run_semilinear(std::move(y0), yd, reactions, diffusion, dt, q.t_final, q.snapshot_every,
                   [&recorder](const OracleSnapshot& snap) { recorder(snap); });
    outcome.record = std::move(recorder.record());
  }
  outcome.wall_seconds = seconds_since(t0);
  auto& rec = outcome.record;
  rec.config = scenario_json(s);
  const auto& last = rec.metrics.back();
  rec.summary = {{"final_l1", last.l1_to_target},
                 {"initial_l1", rec.metrics.front().l1_to_target},
                 {"final_moving_fraction", last.moving_fraction},
                 {"mass_drift", last.total_mass - rec.metrics.front().total_mass},
                 {"dt", dt},
                 {"cells", grid.size()}};
  return outcome;
}

int cmd_run(const fs::path& scenario_path, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load_scenario(scenario_path);
    const fs::path dir = resolve_output_dir(s, opts);
    RunOutcome o = simulate(s, opts);
    o.record.summary["wall_seconds"] = o.wall_seconds;
    export_run(o.record, dir, export_format(s));
    const auto& last = o.record.metrics.back();
    out << std::setprecision(6) << "final_l1=" << last.l1_to_target << " moving_fraction=" << last.moving_fraction
        << " wall_time=" << std::fixed << std::setprecision(2) << o.wall_seconds << "s out=" << dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_oracle(const fs::path& scenario_path, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load_scenario(scenario_path);
    const fs::path dir = resolve_output_dir(s, opts);
    RunOutcome o = solve_oracle(s, opts);
    o.record.summary["wall_seconds"] = o.wall_seconds;
    export_run(o.record, dir, export_format(s));
    const auto& last = o.record.metrics.back();
    out << std::setprecision(6) << "final_l1=" << last.l1_to_target << " moving_fraction=" << last.moving_fraction
        << " mass=" << std::setprecision(15) << last.total_mass << " wall_time=" << std::fixed
        << std::setprecision(2) << o.wall_seconds << "s out=" << dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    VerifyOptions vo;
    if (opts.inject_fault == "bracket-sign") {
      vo.flip_bracket_sign = true;
    } else if (!opts.inject_fault.empty()) {
      throw UsageError("unknown fault '" + opts.inject_fault + "' (known: bracket-sign)");
    }
    const auto results = run_verify_suite(vo);
    std::size_t failed = 0;
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
      if (!r.pass) ++failed;
      out << (r.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width)) << r.name;
      if (opts.verbose) {
        out << "  residual=" << std::scientific << std::setprecision(3) << r.residual << " tol=" << r.tolerance
            << std::defaultfloat;
      }
      out << '\n';
    }
    out << (results.size() - failed) << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitDomain;
  });
}

}  // namespace swarmcov::cli
