#pragma once

#include "swarmcov/grid.hpp"
#include "swarmcov/meanfield.hpp"

#include <cstdint>
#include <functional>

namespace swarmcov {

/// Coefficients of y_t = div(b grad(a y)) on a 1-D or 2-D box grid. Both strictly positive.
struct CoefficientPair {
  GridField a;
  GridField b;

  /// a = 1 / f, b = constant. Stationary density f.
  static CoefficientPair for_equilibrium(const GridField& f, double b = 1.0);
  /// a = 1, b = D: the heat equation with diffusivity D.
  static CoefficientPair laplacian(const Grid& grid, double diffusivity = 1.0);

  void validate() const;
};

/// Largest dt for which the explicit flux update keeps densities non-negative.
double linear_stability_bound(const CoefficientPair& coef);

/// One explicit finite-volume step with zero flux through the boundary.
GridField step_linear(const GridField& y, const CoefficientPair& coef, double dt);

struct TwoStateField {
  GridField moving;      // y1
  GridField motionless;  // y2

  double mass() const { return moving.mass() + motionless.mass(); }
};

/// Strang step of y1_t = div(b grad(a y1)) - F1(y2) y1 + F2(y2) y2, y2_t = F1(y2) y1 - F2(y2) y2
/// with F_i(y2) = r_i(y2 - target): half reaction, full diffusion of y1, half reaction.
/// Each reaction substep solves the per-cell 2x2 system exactly with rates taken at its predicted midpoint.
TwoStateField step_semilinear(const GridField& y1, const GridField& y2, const GridField& target,
                              const ReactionFunctions& reactions, double dt,
                              const CoefficientPair& diffusion);
TwoStateField step_semilinear(const GridField& y1, const GridField& y2, const GridField& target,
                              const ReactionFunctions& reactions, double dt);

struct OracleSnapshot {
  double time = 0.0;
  std::int64_t step = 0;
  const TwoStateField* fields = nullptr;
};

using OracleSink = std::function<void(const OracleSnapshot&)>;

// The run_* drivers shrink dt to t_final / ceil(t_final / dt) so the last step lands on t_final.

/// Integrates the linear equation to t_final; y1 holds y, y2 stays zero.
TwoStateField run_linear(GridField y0, const CoefficientPair& coef, double dt, double t_final,
                         std::int64_t snapshot_every, const OracleSink& sink = {});

TwoStateField run_semilinear(TwoStateField y0, const GridField& target, const ReactionFunctions& reactions,
                             const CoefficientPair& diffusion, double dt, double t_final,
                             std::int64_t snapshot_every, const OracleSink& sink = {});

}  // namespace swarmcov
