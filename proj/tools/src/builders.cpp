#include "swarmcov/cli/scenario.hpp"

#include "swarmcov/target.hpp"

#include <cmath>

namespace swarmcov::cli {

namespace {

const BoxDomain& require_box(const Domain& domain, const std::string& what) {
  const auto* box = std::get_if<BoxDomain>(&domain);
  if (!box) throw ConfigError(what + " needs a box domain");
  return *box;
}

Point to_point(const std::vector<double>& v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = v[i];
  return p;
}

}  // namespace

Domain build_domain(const Scenario& s) {
  if (s.domain.kind == "sphere") return SphereDomain{};
  try {
    return BoxDomain(to_point(s.domain.lo), to_point(s.domain.hi));
  } catch (const UsageError& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
}

FieldFamily build_family(const Scenario& s) {
  const bool sphere = s.domain.kind == "sphere";
  if (s.fields == "sphere" && !sphere) throw ConfigError("fields: sphere fields need domain.kind sphere");
  if (s.fields != "sphere" && sphere) throw ConfigError("fields: the sphere domain needs fields sphere");
  if (s.fields == "brockett" && s.domain.lo.size() != 3) throw ConfigError("fields: brockett needs a 3-D box");
  const int dim = sphere ? 3 : static_cast<int>(s.domain.lo.size());
  return builtin_family(s.fields, dim);
}

std::shared_ptr<const TargetDensity> build_target(const Scenario& s, const Domain& domain) {
  const auto& t = s.target;
  const BumpProfile profile = t.profile == "raised-cosine" ? BumpProfile::RaisedCosine : BumpProfile::Flat;
  try {
    if (t.kind == "uniform") return std::make_shared<TargetDensity>(make_uniform_target(domain));
    if (t.kind == "sphere-caps") {
      if (!std::holds_alternative<SphereDomain>(domain)) throw ConfigError("target.kind: sphere-caps needs a sphere");
      return std::make_shared<TargetDensity>(make_sphere_caps_target(t.threshold));
    }
    const BoxDomain& box = require_box(domain, "target.kind " + t.kind);
    if (t.kind == "balls8" || t.kind == "balls8+floor") {
      // 2^dim balls centred on the {1/4, 3/4} lattice
      std::vector<Point> centers;
      const int d = box.dim();
      for (int mask = 0; mask < (1 << d); ++mask) {
        Point c(d);
        for (int a = 0; a < d; ++a) c[a] = box.lo[a] + box.width(a) * (((mask >> a) & 1) ? 0.75 : 0.25);
        centers.push_back(c);
      }
      const double radius = t.radius.value_or(box.width(0) / 8.0);
      const double floor = t.kind == "balls8" ? 0.0 : t.floor;
      return std::make_shared<TargetDensity>(make_balls_target(box, std::move(centers), radius, floor, profile));
    }
    if (t.kind == "balls") {
      std::vector<Point> centers;
      for (const auto& c : t.centers) {
        if (static_cast<int>(c.size()) != box.dim()) throw ConfigError("target.centers: dimension mismatch");
        centers.push_back(to_point(c));
      }
      return std::make_shared<TargetDensity>(make_balls_target(box, std::move(centers), *t.radius, t.floor, profile));
    }
    if (t.kind == "sinusoid") {
      return std::make_shared<TargetDensity>(make_sinusoid_target(box, t.amplitude, t.wavenumber));
    }
    if (t.kind == "grid") {
      if (static_cast<int>(t.cells.size()) != box.dim()) throw ConfigError("target.cells: one entry per axis");
      const Grid grid = Grid::box(box, t.cells);
      auto values = read_grid_file(s.base_dir / t.file);
      if (values.size() != grid.size()) {
        throw ConfigError("target.file: holds " + std::to_string(values.size()) + " cells but target.cells gives " +
                          std::to_string(grid.size()));
      }
      return std::make_shared<TargetDensity>(make_grid_target(grid, std::move(values)));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const UsageError& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }
  throw ConfigError("target.kind: unsupported '" + t.kind + "'");
}

ControlLaw build_law(const Scenario& s, const Domain& domain, std::shared_ptr<const TargetDensity> target,
                     std::size_t n_fields) {
  const auto& c = s.control;
  double scale = 1.0;
  if (c.density_scale == "domain") {
    scale = measure(domain);
  } else if (c.density_scale != "absolute") {
    scale = std::stod(c.density_scale);
  }
  ControlLaw law;
  if (c.variant == "noninteracting") {
    law = ControlLaw::noninteracting(std::move(target), c.D, scale);
  } else if (c.variant == "gradient_drift") {
    law = ControlLaw::gradient_drift(std::move(target), c.D, scale);
  } else if (c.variant == "switching") {
    const Kernel kernel = std::holds_alternative<SphereDomain>(domain) ? Kernel::sphere(c.epsilon)
                                                                       : Kernel::euclidean(c.epsilon, ambient_dim(domain));
    const auto source = c.density_source == "all" ? DensitySource::AllAgents : DensitySource::MotionlessOnly;
    law = ControlLaw::switching(std::move(target), c.D, ReactionFunctions{c.k, c.q_max}, kernel, source, scale);
  } else {
    law = ControlLaw::constant(c.u, c.v);
    law.target = std::move(target);
  }
  try {
    law.validate(n_fields);
  } catch (const UsageError& e) {
    throw ConfigError(std::string("control: ") + e.what());
  }
  return law;
}

SimConfig build_sim_config(const Scenario& s, int threads) {
  SimConfig cfg;
  cfg.dt = s.sim.dt;
  cfg.t_final = s.sim.t_final;
  cfg.n_particles = static_cast<std::size_t>(s.sim.n_particles);
  cfg.seed = s.sim.seed;
  cfg.substeps = s.sim.substeps;
  cfg.snapshot_every = s.sim.snapshot_every;
  cfg.integrator = s.sim.integrator == "heun"    ? Integrator::Heun
                   : s.sim.integrator == "exact" ? Integrator::ExactFlow
                                                 : Integrator::Auto;
  cfg.threads = threads;
  return cfg;
}

SwarmState build_initial(const Scenario& s, const Domain& domain) {
  const auto n = static_cast<std::size_t>(s.sim.n_particles);
  if (s.initial.kind == "region") {
    try {
      return sample_region_state(domain, BoxDomain(to_point(s.initial.lo), to_point(s.initial.hi)), n, s.sim.seed);
    } catch (const UsageError& e) {
      throw ConfigError(std::string("initial: ") + e.what());
    }
  }
  return sample_uniform_state(domain, n, s.sim.seed);
}

Grid build_metrics_grid(const Scenario& s, const Domain& domain) {
  return Grid::over(domain, s.output.metrics_cells);
}

}  // namespace swarmcov::cli
