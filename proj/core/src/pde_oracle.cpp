#include "swarmcov/pde_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace swarmcov {

namespace {

constexpr double kNegativeTolerance = -1e-12;

void require_oracle_grid(const Grid& grid) {
  if (grid.kind() != Grid::Kind::Box || grid.axes() < 1 || grid.axes() > 2) {
    throw UsageError("the PDE oracle runs on 1-D or 2-D box grids");
  }
}

void require_same_grid(const GridField& x, const GridField& y, const char* what) {
  if (!(x.grid == y.grid)) throw UsageError(std::string("grid mismatch: ") + what);
}

void require_non_negative(const GridField& y, const char* what) {
  if (!y.all_finite()) throw UsageError(std::string(what) + " has non-finite values");
  if (y.min() < kNegativeTolerance) throw UsageError(std::string(what) + " has negative densities");
}

// Adds dt * div(b grad(a y)) to y in place.
void diffuse(std::vector<double>& y, const CoefficientPair& coef, double dt) {
  const Grid& g = coef.a.grid;
  const int nx = g.cells(0);
  const int ny = g.axes() > 1 ? g.cells(1) : 1;
  const auto& a = coef.a.values;
  const auto& b = coef.b.values;
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = a[i] * y[i];
  std::vector<double> div(y.size(), 0.0);

  const double hx = g.spacing(0);
  const double cx = dt / (hx * hx);
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx);
    for (int i = 0; i + 1 < nx; ++i) {
      const std::size_t l = row + static_cast<std::size_t>(i);
      const std::size_t r = l + 1;
      const double flux = cx * 0.5 * (b[l] + b[r]) * (w[r] - w[l]);
      div[l] += flux;
      div[r] -= flux;
    }
  }
  if (g.axes() > 1) {
    const double hy = g.spacing(1);
    const double cy = dt / (hy * hy);
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t l = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
        const std::size_t r = l + static_cast<std::size_t>(nx);
        const double flux = cy * 0.5 * (b[l] + b[r]) * (w[r] - w[l]);
        div[l] += flux;
        div[r] -= flux;
      }
    }
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += div[i];
}

// Exponential midpoint rule for the per-cell exchange y1 <-> y2 over time tau: the rates
// are frozen at a predicted half-step state and the 2x2 system is then solved exactly.
void react(std::vector<double>& y1, std::vector<double>& y2, const std::vector<double>& target,
           const ReactionFunctions& reactions, double tau, double dt_full) {
  auto transfer = [](const TransitionRates& q, double m1, double m2, double t) {
    const double lambda = q.stop + q.resume;
    if (lambda == 0.0) return 0.0;
    return -std::expm1(-lambda * t) * (q.stop * m1 - q.resume * m2) / lambda;
  };
  double max_rate = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const TransitionRates q0 = transition_rates(reactions, y2[i], target[i]);
    const double half = transfer(q0, y1[i], y2[i], 0.5 * tau);
    const TransitionRates q = transition_rates(reactions, y2[i] + half, target[i]);
    max_rate = std::max({max_rate, q0.stop + q0.resume, q.stop + q.resume});
    const double moved = transfer(q, y1[i], y2[i], tau);
    y1[i] -= moved;
    y2[i] += moved;
  }
  if (dt_full * max_rate >= 1.0) {
    std::ostringstream msg;
    msg << "dt * max(q) = " << dt_full * max_rate << " violates the reaction bound dt * max(q) < 1";
    throw UsageError(msg.str());
  }
}

void strang_inplace(TwoStateField& s, const GridField& target, const ReactionFunctions& reactions, double dt,
                    const CoefficientPair& diffusion) {
  react(s.moving.values, s.motionless.values, target.values, reactions, 0.5 * dt, dt);
  diffuse(s.moving.values, diffusion, dt);
  react(s.moving.values, s.motionless.values, target.values, reactions, 0.5 * dt, dt);
}

}  // namespace

CoefficientPair CoefficientPair::for_equilibrium(const GridField& f, double b) {
  CoefficientPair c{GridField(f.grid), GridField(f.grid, b)};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f.values[i] > 0.0)) throw ConfigError("equilibrium density must be strictly positive");
    c.a.values[i] = 1.0 / f.values[i];
  }
  return c;
}

CoefficientPair CoefficientPair::laplacian(const Grid& grid, double diffusivity) {
  return CoefficientPair{GridField(grid, 1.0), GridField(grid, diffusivity)};
}

void CoefficientPair::validate() const {
  require_oracle_grid(a.grid);
  require_same_grid(a, b, "coefficients a and b");
  if (!a.all_finite() || !b.all_finite() || !(a.min() > 0.0) || !(b.min() > 0.0)) {
    throw UsageError("coefficients a and b must be finite and strictly positive");
  }
}

double linear_stability_bound(const CoefficientPair& coef) {
  coef.validate();
  const auto& g = coef.a.grid;
  double inv_h2 = 0.0;
  for (int ax = 0; ax < g.axes(); ++ax) inv_h2 += 1.0 / (g.spacing(ax) * g.spacing(ax));
  const double amax = *std::max_element(coef.a.values.begin(), coef.a.values.end());
  const double bmax = *std::max_element(coef.b.values.begin(), coef.b.values.end());
  return 1.0 / (2.0 * inv_h2 * amax * bmax);
}

GridField step_linear(const GridField& y, const CoefficientPair& coef, double dt) {
  require_same_grid(y, coef.a, "density and coefficients");
  const double bound = linear_stability_bound(coef);
  if (!(dt > 0.0) || dt > bound) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the explicit stability bound " << bound;
    throw UsageError(msg.str());
  }
  GridField out = y;
  diffuse(out.values, coef, dt);
  return out;
}

TwoStateField step_semilinear(const GridField& y1, const GridField& y2, const GridField& target,
                              const ReactionFunctions& reactions, double dt,
                              const CoefficientPair& diffusion) {
  require_same_grid(y1, y2, "y1 and y2");
  require_same_grid(y1, target, "densities and target");
  require_same_grid(y1, diffusion.a, "densities and coefficients");
  require_non_negative(y1, "y1");
  require_non_negative(y2, "y2");
  const double bound = linear_stability_bound(diffusion);
  if (!(dt > 0.0) || dt > bound) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the explicit stability bound " << bound;
    throw UsageError(msg.str());
  }
  TwoStateField out{y1, y2};
  strang_inplace(out, target, reactions, dt, diffusion);
  return out;
}

TwoStateField step_semilinear(const GridField& y1, const GridField& y2, const GridField& target,
                              const ReactionFunctions& reactions, double dt) {
  return step_semilinear(y1, y2, target, reactions, dt, CoefficientPair::laplacian(y1.grid));
}

namespace {

std::int64_t step_count(double dt, double t_final) {
  if (!(dt > 0.0)) throw UsageError("oracle dt must be positive");
  if (!(t_final >= 0.0)) throw UsageError("oracle t_final must be >= 0");
  return static_cast<std::int64_t>(std::ceil(t_final / dt - 1e-9));
}

}  // namespace

TwoStateField run_linear(GridField y0, const CoefficientPair& coef, double dt, double t_final,
                         std::int64_t snapshot_every, const OracleSink& sink) {
  if (snapshot_every < 1) throw UsageError("snapshot_every must be >= 1");
  require_same_grid(y0, coef.a, "initial density and coefficients");
  require_non_negative(y0, "initial density");
  const double bound = linear_stability_bound(coef);
  if (!(dt > 0.0) || dt > bound) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the explicit stability bound " << bound;
    throw UsageError(msg.str());
  }
  const std::int64_t steps = step_count(dt, t_final);
  if (steps > 0) dt = t_final / static_cast<double>(steps);
  TwoStateField state{std::move(y0), GridField(coef.a.grid)};
  if (sink) sink({0.0, 0, &state});
  for (std::int64_t n = 1; n <= steps; ++n) {
    diffuse(state.moving.values, coef, dt);
    if (sink && (n % snapshot_every == 0 || n == steps)) sink({static_cast<double>(n) * dt, n, &state});
  }
  return state;
}

TwoStateField run_semilinear(TwoStateField y0, const GridField& target, const ReactionFunctions& reactions,
                             const CoefficientPair& diffusion, double dt, double t_final,
                             std::int64_t snapshot_every, const OracleSink& sink) {
  if (snapshot_every < 1) throw UsageError("snapshot_every must be >= 1");
  const std::int64_t steps = step_count(dt, t_final);
  if (steps > 0) dt = t_final / static_cast<double>(steps);
  TwoStateField state = std::move(y0);
  if (steps > 0) {
    // Validates grids, signs and both step-size bounds once.
    (void)step_semilinear(state.moving, state.motionless, target, reactions, dt, diffusion);
  }
  if (sink) sink({0.0, 0, &state});
  for (std::int64_t n = 1; n <= steps; ++n) {
    strang_inplace(state, target, reactions, dt, diffusion);
    if (sink && (n % snapshot_every == 0 || n == steps)) sink({static_cast<double>(n) * dt, n, &state});
  }
  return state;
}

}  // namespace swarmcov
