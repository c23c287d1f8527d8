#include "swarmcov/sde.hpp"

#include "swarmcov/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace swarmcov {

std::size_t SwarmState::moving_count() const {
  return static_cast<std::size_t>(std::count(states.begin(), states.end(), MotionState::Moving));
}

ControlLaw ControlLaw::noninteracting(std::shared_ptr<const TargetDensity> target, double diffusion_gain,
                                      double density_scale) {
  ControlLaw law;
  law.variant = ControlVariant::NonInteractingDiffusion;
  law.target = std::move(target);
  law.diffusion_gain = diffusion_gain;
  law.density_scale = density_scale;
  return law;
}

ControlLaw ControlLaw::gradient_drift(std::shared_ptr<const TargetDensity> target, double diffusion_gain,
                                      double density_scale) {
  ControlLaw law = noninteracting(std::move(target), diffusion_gain, density_scale);
  law.variant = ControlVariant::GradientDrift;
  return law;
}

ControlLaw ControlLaw::switching(std::shared_ptr<const TargetDensity> target, double diffusion_gain,
                                 ReactionFunctions reactions, Kernel kernel, DensitySource source,
                                 double density_scale) {
  ControlLaw law;
  law.variant = ControlVariant::MeanFieldSwitching;
  law.target = std::move(target);
  law.diffusion_gain = diffusion_gain;
  law.reactions = reactions;
  law.kernel = kernel;
  law.density_source = source;
  law.density_scale = density_scale;
  return law;
}

ControlLaw ControlLaw::constant(std::vector<double> u, std::vector<double> v) {
  ControlLaw law;
  law.variant = ControlVariant::Constant;
  law.constant_u = std::move(u);
  law.constant_v = std::move(v);
  return law;
}

void ControlLaw::validate(std::size_t n_fields) const {
  if (n_fields == 0 || n_fields > kMaxFields) throw UsageError("field family must have 1..4 fields");
  if (!(density_scale > 0.0) || !std::isfinite(density_scale)) {
    throw UsageError("density scale must be positive");
  }
  switch (variant) {
    case ControlVariant::Constant:
      if (constant_u.size() != n_fields || constant_v.size() != n_fields) {
        throw UsageError("constant law needs one u and one v per field");
      }
      return;
    case ControlVariant::MeanFieldSwitching:
      if (!(reactions.k > 0.0)) throw UsageError("reaction gain k must be positive");
      if (!(reactions.cap > 0.0)) throw UsageError("rate cap must be positive");
      if (!(kernel.epsilon() > 0.0)) throw UsageError("kernel epsilon must be positive");
      [[fallthrough]];
    case ControlVariant::NonInteractingDiffusion:
    case ControlVariant::GradientDrift:
      if (!(diffusion_gain > 0.0) || !std::isfinite(diffusion_gain)) {
        throw UsageError("diffusion gain D must be positive");
      }
      if (!target) throw UsageError("control law needs a target density");
      return;
  }
}

bool ControlLaw::spatially_constant() const {
  return variant == ControlVariant::Constant || variant == ControlVariant::MeanFieldSwitching;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("sim.dt must be > 0");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw UsageError("sim.t_final must be >= 0");
  if (n_particles < 1) throw UsageError("sim.particles must be >= 1");
  if (substeps < 1) throw UsageError("sim.substeps must be >= 1");
  if (snapshot_every < 1) throw UsageError("sim.snapshot_every must be >= 1");
}

std::int64_t SimConfig::total_steps() const {
  return static_cast<std::int64_t>(std::ceil(t_final / dt - 1e-9));
}

Coefficients noninteracting_coefficients(const ControlLaw& law, const Point& x, std::size_t n_fields) {
  if (law.variant != ControlVariant::NonInteractingDiffusion) {
    throw std::logic_error("noninteracting_coefficients called for another control variant");
  }
  const double yd = (*law.target)(x) * law.density_scale;
  if (!(yd > 0.0)) {
    throw ConfigError("non-interacting law requires a target density bounded below by a positive number");
  }
  Coefficients c;
  c.m = n_fields;
  const double v = std::sqrt(law.diffusion_gain) / yd;
  for (std::size_t i = 0; i < n_fields; ++i) c.v[i] = v;
  return c;
}

Coefficients control_coefficients(const ControlLaw& law, const FieldFamily& family, const Point& x) {
  const std::size_t m = family.size();
  switch (law.variant) {
    case ControlVariant::NonInteractingDiffusion:
      return noninteracting_coefficients(law, x, m);
    case ControlVariant::MeanFieldSwitching: {
      Coefficients c;
      c.m = m;
      const double v = std::sqrt(law.diffusion_gain);
      for (std::size_t i = 0; i < m; ++i) c.v[i] = v;
      return c;
    }
    case ControlVariant::GradientDrift: {
      Coefficients c;
      c.m = m;
      const auto& f = *law.target;
      const double fx = f(x);
      if (!(fx > 0.0)) throw ConfigError("gradient drift law requires a positive target density");
      const double h = 1e-6 * std::max(1.0, x.norm());
      const double v = std::sqrt(law.diffusion_gain);
      for (std::size_t i = 0; i < m; ++i) {
        const Point xi = family[i].eval(x);
        const double dfx = (f(x + h * xi) - f(x - h * xi)) / (2.0 * h);
        c.u[i] = law.diffusion_gain * dfx / fx;
        c.v[i] = v;
      }
      return c;
    }
    case ControlVariant::Constant: {
      Coefficients c;
      c.m = m;
      for (std::size_t i = 0; i < m; ++i) {
        c.u[i] = law.constant_u[i];
        c.v[i] = law.constant_v[i];
      }
      return c;
    }
  }
  throw std::logic_error("unknown control variant");
}

Integrator resolve_integrator(Integrator requested, const ControlLaw& law, const FieldFamily& family) {
  if (requested == Integrator::ExactFlow && !family.all_exact_flows()) {
    throw UsageError("exact-flow integration needs closed-form flows for every field");
  }
  if (requested != Integrator::Auto) return requested;
  return family.all_exact_flows() && law.spatially_constant() ? Integrator::ExactFlow : Integrator::Heun;
}

namespace {

Point wong_zakai_velocity(const Point& y, std::span<const double> dW, const ControlLaw& law,
                          const FieldFamily& family, double dt) {
  const Coefficients c = control_coefficients(law, family, y);
  Point vel = Point::Zero(y.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double a = c.u[i] * dt + std::sqrt(2.0) * c.v[i] * dW[i];
    if (a != 0.0) vel += a * family[i].eval(y);
  }
  return vel;
}

}  // namespace

Point advance_particle(const Point& x, std::span<const double> dW, const ControlLaw& law,
                       const FieldFamily& family, const Domain& domain, double dt, int substeps,
                       Integrator integrator) {
  const std::size_t m = family.size();
  if (dW.size() != m) throw UsageError("one Brownian increment per field is required");
  integrator = resolve_integrator(integrator, law, family);

  if (integrator == Integrator::ExactFlow) {
    const Coefficients c = control_coefficients(law, family, x);
    std::array<double, kMaxFields> a{};
    for (std::size_t i = 0; i < m; ++i) a[i] = c.u[i] * dt + std::sqrt(2.0) * c.v[i] * dW[i];
    // Strang order: half flows of X_1..X_{m-1}, full flow of X_m, then the halves in reverse.
    Point y = x;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (a[i] != 0.0) y = family[i].exact_flow(y, 0.5 * a[i]);
    }
    if (a[m - 1] != 0.0) y = family[m - 1].exact_flow(y, a[m - 1]);
    for (std::size_t i = m - 1; i-- > 0;) {
      if (a[i] != 0.0) y = family[i].exact_flow(y, 0.5 * a[i]);
    }
    return confine(domain, y);
  }

  // Heun on s in [0, 1], where dx/ds = sum_i (u_i dt + sqrt(2) v_i dW_i) X_i(x).
  const double ds = 1.0 / substeps;
  Point y = x;
  for (int s = 0; s < substeps; ++s) {
    const Point k1 = wong_zakai_velocity(y, dW, law, family, dt);
    const Point predictor = confine(domain, y + ds * k1);
    const Point k2 = wong_zakai_velocity(predictor, dW, law, family, dt);
    y = confine(domain, y + 0.5 * ds * (k1 + k2));
  }
  return y;
}

SwarmState stratonovich_step(SwarmState state, const ControlLaw& law, const FieldFamily& family,
                             const Domain& domain, double dt, const StepContext& ctx) {
  if (!(dt > 0.0)) throw UsageError("dt must be positive");
  const Integrator integrator = resolve_integrator(ctx.integrator, law, family);
  const std::size_t m = family.size();
  const bool switching = law.is_switching();
  auto body = [&](std::size_t begin, std::size_t end) {
    std::array<double, kMaxFields> dW{};
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t j = begin; j < end; ++j) {
      if (switching && state.states[j] == MotionState::Motionless) continue;
      StreamRng rng(ctx.seed, j, static_cast<std::uint64_t>(state.step), StreamPurpose::Noise);
      for (std::size_t i = 0; i < m; ++i) dW[i] = sqrt_dt * rng.normal();
      Point next = advance_particle(state.positions[j], std::span<const double>(dW.data(), m), law, family,
                                    domain, dt, ctx.substeps, integrator);
      if (!next.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite position at step " << state.step << ", particle " << j;
        throw NumericalError(msg.str());
      }
      state.positions[j] = next;
    }
  };
  if (ctx.executor) {
    ctx.executor->for_each(state.size(), body);
  } else {
    body(0, state.size());
  }
  return state;
}

std::vector<TransitionRates> compute_rates(const SwarmState& state, const ControlLaw& law,
                                           const Domain& domain, const Executor* executor) {
  if (!law.is_switching()) throw std::logic_error("compute_rates needs a switching law");
  std::vector<Point> sources;
  sources.reserve(state.size());
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (law.density_source == DensitySource::AllAgents || state.states[j] == MotionState::Motionless) {
      sources.push_back(state.positions[j]);
    }
  }
  const KdeIndex index(law.kernel, domain, sources, state.size());
  const auto& target = *law.target;
  const double scale = law.density_scale;

  std::vector<TransitionRates> rates(state.size());
  auto body = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Point& x = state.positions[j];
      const double yd = target(x);
      if (state.states[j] == MotionState::Moving) {
        // q1 = r1(rho - y^d) vanishes once rho >= y^d, so the sum may stop there.
        if (!(yd > 0.0)) continue;
        const double rho = index.density_until(x, yd);
        rates[j] = transition_rates(law.reactions, rho * scale, yd * scale);
      } else {
        rates[j] = transition_rates(law.reactions, index.density(x) * scale, yd * scale);
      }
    }
  };
  if (executor) {
    executor->for_each(state.size(), body);
  } else {
    body(0, state.size());
  }
  return rates;
}

RateEvaluator::RateEvaluator(const ControlLaw& law, const Domain& domain) : law_(&law), domain_(&domain) {
  if (!law.is_switching()) throw std::logic_error("RateEvaluator needs a switching law");
}

std::vector<TransitionRates> RateEvaluator::operator()(const SwarmState& state, const Executor* executor) {
  const ControlLaw& law = *law_;
  if (law.density_source == DensitySource::AllAgents) return compute_rates(state, law, *domain_, executor);

  const std::size_t n = state.size();
  std::vector<Point> sources;
  sources.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (state.states[j] == MotionState::Motionless) sources.push_back(state.positions[j]);
  }
  const KdeIndex index(law.kernel, *domain_, sources, n);

  const bool warm = was_still_.size() == n;
  std::vector<char> dirty(index.cell_count(), 0);
  if (warm) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool still = state.states[j] == MotionState::Motionless;
      if (was_still_[j] && (!still || where_[j] != state.positions[j])) dirty[index.cell_of(where_[j])] = 1;
      if (still && (!was_still_[j] || where_[j] != state.positions[j])) dirty[index.cell_of(state.positions[j])] = 1;
    }
  } else {
    rho_.assign(n, 0.0);
    was_still_.assign(n, 0);
    where_.assign(n, Point());
  }

  const auto& target = *law.target;
  const double scale = law.density_scale;
  std::vector<TransitionRates> rates(n);
  std::vector<char> reused(n, 0);
  auto body = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Point& x = state.positions[j];
      const double yd = target(x);
      if (state.states[j] == MotionState::Moving) {
        if (!(yd > 0.0)) continue;
        rates[j] = transition_rates(law.reactions, index.density_until(x, yd) * scale, yd * scale);
      } else {
        if (warm && was_still_[j] && where_[j] == x && !index.window_marked(x, dirty)) {
          reused[j] = 1;
        } else {
          rho_[j] = index.density(x);
        }
        rates[j] = transition_rates(law.reactions, rho_[j] * scale, yd * scale);
      }
    }
  };
  if (executor) {
    executor->for_each(n, body);
  } else {
    body(0, n);
  }
  reused_ = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool still = state.states[j] == MotionState::Motionless;
    was_still_[j] = still;
    if (still) where_[j] = state.positions[j];
    reused_ += static_cast<std::size_t>(reused[j]);
  }
  return rates;
}

SwarmState switching_step(SwarmState state, std::span<const TransitionRates> rates, double dt,
                          std::uint64_t seed, const Executor* executor) {
  if (rates.size() != state.size()) throw UsageError("one rate pair per particle is required");
  auto body = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const TransitionRates& q = rates[j];
      if (q.stop < 0.0 || q.resume < 0.0 || std::isnan(q.stop) || std::isnan(q.resume)) {
        throw std::logic_error("negative or NaN transition rate");
      }
      const bool moving = state.states[j] == MotionState::Moving;
      const double rate = moving ? q.stop : q.resume;
      if (rate == 0.0) continue;
      const double p = -std::expm1(-rate * dt);
      StreamRng rng(seed, j, static_cast<std::uint64_t>(state.step), StreamPurpose::Switching);
      if (rng.uniform() < p) state.states[j] = moving ? MotionState::Motionless : MotionState::Moving;
    }
  };
  if (executor) {
    executor->for_each(state.size(), body);
  } else {
    body(0, state.size());
  }
  return state;
}

SwarmState sample_uniform_state(const Domain& domain, std::size_t n, std::uint64_t seed) {
  if (const auto* box = std::get_if<BoxDomain>(&domain)) return sample_region_state(domain, *box, n, seed);
  SwarmState s;
  s.positions.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    StreamRng rng(seed, j, 0, StreamPurpose::Initial);
    Point p(3);
    do {
      for (int a = 0; a < 3; ++a) p[a] = rng.normal();
    } while (p.norm() < 1e-12);
    s.positions.push_back(p / p.norm());
  }
  s.states.assign(n, MotionState::Moving);
  return s;
}

SwarmState sample_region_state(const Domain& domain, const BoxDomain& region, std::size_t n,
                               std::uint64_t seed) {
  const auto* box = std::get_if<BoxDomain>(&domain);
  if (!box) throw UsageError("region sampling needs a box domain");
  if (region.dim() != box->dim()) throw UsageError("sampling region dimension does not match the domain");
  for (int a = 0; a < box->dim(); ++a) {
    if (region.lo[a] < box->lo[a] || region.hi[a] > box->hi[a]) {
      throw UsageError("sampling region must lie inside the domain");
    }
  }
  SwarmState s;
  s.positions.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    StreamRng rng(seed, j, 0, StreamPurpose::Initial);
    Point p(region.dim());
    for (int a = 0; a < region.dim(); ++a) p[a] = region.lo[a] + rng.uniform() * region.width(a);
    s.positions.push_back(p);
  }
  s.states.assign(n, MotionState::Moving);
  return s;
}

SwarmState run(const SimConfig& config, const ControlLaw& law, const FieldFamily& family,
               const Domain& domain, SwarmState initial, const SnapshotSink& sink) {
  config.validate();
  law.validate(family.size());
  if (family.dim != ambient_dim(domain)) throw UsageError("field family and domain dimensions differ");

  SwarmState state = initial.positions.empty() ? sample_uniform_state(domain, config.n_particles, config.seed)
                                               : std::move(initial);
  if (state.states.size() != state.positions.size()) throw UsageError("initial state needs one mode per particle");
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (!contains(domain, state.positions[j])) {
      std::ostringstream msg;
      msg << "initial particle " << j << " lies outside the domain";
      throw UsageError(msg.str());
    }
    if (!law.is_switching() && state.states[j] != MotionState::Moving) {
      throw UsageError("non-interacting runs require every particle to be Moving");
    }
  }

  const Executor executor(config.threads);
  const StepContext ctx{config.seed, config.substeps, config.integrator, &executor};
  const std::int64_t steps = config.total_steps();
  const double t0 = state.time;
  const std::int64_t step0 = state.step;

  std::optional<RateEvaluator> evaluator;
  if (law.is_switching()) evaluator.emplace(law, domain);

  if (sink) sink(state);
  for (std::int64_t n = 1; n <= steps; ++n) {
    if (evaluator) {
      const auto rates = (*evaluator)(state, &executor);
      state = switching_step(std::move(state), rates, config.dt, config.seed, &executor);
    }
    state = stratonovich_step(std::move(state), law, family, domain, config.dt, ctx);
    state.step = step0 + n;
    state.time = t0 + static_cast<double>(n) * config.dt;
    if (sink && (n % config.snapshot_every == 0 || n == steps)) sink(state);
  }
  return state;
}

}  // namespace swarmcov
