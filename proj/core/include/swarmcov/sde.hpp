#pragma once

#include "swarmcov/domains.hpp"
#include "swarmcov/meanfield.hpp"
#include "swarmcov/parallel.hpp"
#include "swarmcov/target.hpp"
#include "swarmcov/types.hpp"
#include "swarmcov/vectorfields.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace swarmcov {

inline constexpr std::size_t kMaxFields = 4;

enum class MotionState : std::uint8_t { Moving = 0, Motionless = 1 };

/// Positions Z_j(t) and discrete states Y_j(t) of the whole swarm.
struct SwarmState {
  std::vector<Point> positions;
  std::vector<MotionState> states;
  double time = 0.0;
  std::int64_t step = 0;

  std::size_t size() const { return positions.size(); }
  std::size_t moving_count() const;
};

enum class ControlVariant {
  /// u = 0, v = sqrt(D) / y^d: stationary density y^d, no interaction.
  NonInteractingDiffusion,
  /// u = D X_i y^d / y^d, v = sqrt(D).
  GradientDrift,
  /// v = sqrt(D) while Moving; stop/resume rates from the kernel density estimate.
  MeanFieldSwitching,
  /// Fixed u and v, used for calibration runs.
  Constant,
};

enum class DensitySource { MotionlessOnly, AllAgents };

enum class Integrator {
  /// ExactFlow when every field has a closed-form flow and the coefficients are spatially constant.
  Auto,
  /// Explicit trapezoidal substeps of the Wong-Zakai ODE.
  Heun,
  /// Strang composition of exact flows with coefficients frozen at the step start.
  ExactFlow,
};

struct ControlLaw {
  ControlVariant variant = ControlVariant::Constant;
  /// D in length^2 / second.
  double diffusion_gain = 1.0;
  std::shared_ptr<const TargetDensity> target;
  ReactionFunctions reactions;
  Kernel kernel;
  DensitySource density_source = DensitySource::MotionlessOnly;
  /// Densities entering the law are multiplied by this reference volume before use.
  /// 1 means absolute units; |Omega| means densities relative to the uniform density.
  double density_scale = 1.0;
  std::vector<double> constant_u;
  std::vector<double> constant_v;

  static ControlLaw noninteracting(std::shared_ptr<const TargetDensity> target, double diffusion_gain,
                                   double density_scale = 1.0);
  static ControlLaw gradient_drift(std::shared_ptr<const TargetDensity> target, double diffusion_gain,
                                   double density_scale = 1.0);
  static ControlLaw switching(std::shared_ptr<const TargetDensity> target, double diffusion_gain,
                              ReactionFunctions reactions, Kernel kernel,
                              DensitySource source = DensitySource::MotionlessOnly,
                              double density_scale = 1.0);
  static ControlLaw constant(std::vector<double> u, std::vector<double> v);

  void validate(std::size_t n_fields) const;
  bool is_switching() const { return variant == ControlVariant::MeanFieldSwitching; }
  /// True when u and v do not depend on position.
  bool spatially_constant() const;
};

struct SimConfig {
  double dt = 0.01;
  double t_final = 1.0;
  std::size_t n_particles = 1;
  std::uint64_t seed = 1;
  int substeps = 4;
  std::int64_t snapshot_every = 100;
  Integrator integrator = Integrator::Auto;
  int threads = 1;

  void validate() const;
  std::int64_t total_steps() const;
};

/// Control inputs u_i(x), v_i(x) for each field.
struct Coefficients {
  std::array<double, kMaxFields> u{};
  std::array<double, kMaxFields> v{};
  std::size_t m = 0;
};

/// u_i = 0 and v_i = sqrt(D) / y^d(x). Throws ConfigError where y^d(x) = 0.
Coefficients noninteracting_coefficients(const ControlLaw& law, const Point& x, std::size_t n_fields);

/// Coefficients of any variant for a Moving particle.
Coefficients control_coefficients(const ControlLaw& law, const FieldFamily& family, const Point& x);

Integrator resolve_integrator(Integrator requested, const ControlLaw& law, const FieldFamily& family);

/// One Wong-Zakai step of a single particle driven by Brownian increments dW (one per field).
Point advance_particle(const Point& x, std::span<const double> dW, const ControlLaw& law,
                       const FieldFamily& family, const Domain& domain, double dt, int substeps,
                       Integrator integrator);

struct StepContext {
  std::uint64_t seed = 1;
  int substeps = 4;
  Integrator integrator = Integrator::Auto;
  const Executor* executor = nullptr;
};

/// Moves every Moving particle by one step of length dt. Noise for particle j is drawn
/// from the stream (seed, j, state.step). Time and step counters are left unchanged.
SwarmState stratonovich_step(SwarmState state, const ControlLaw& law, const FieldFamily& family,
                             const Domain& domain, double dt, const StepContext& ctx);

/// Rates for every particle from the kernel density estimate of the current snapshot.
std::vector<TransitionRates> compute_rates(const SwarmState& state, const ControlLaw& law,
                                           const Domain& domain, const Executor* executor = nullptr);

/// Same rates as compute_rates, with the densities at Motionless particles carried over
/// between calls. A carried value is reused only when no contributing particle inside
/// its hash window changed state, so the summation it replaces would have been identical.
class RateEvaluator {
 public:
  RateEvaluator(const ControlLaw& law, const Domain& domain);

  std::vector<TransitionRates> operator()(const SwarmState& state, const Executor* executor = nullptr);
  /// Densities reused on the last call.
  std::size_t reused() const { return reused_; }

 private:
  const ControlLaw* law_;
  const Domain* domain_;
  std::vector<double> rho_;
  std::vector<char> was_still_;
  std::vector<Point> where_;
  std::size_t reused_ = 0;
};

/// Exponential-clock state flips: Moving stops with probability 1 - exp(-q1 dt),
/// Motionless resumes with probability 1 - exp(-q2 dt). Positions are untouched.
SwarmState switching_step(SwarmState state, std::span<const TransitionRates> rates, double dt,
                          std::uint64_t seed, const Executor* executor = nullptr);

/// n i.i.d. uniform positions on the domain, all Moving.
SwarmState sample_uniform_state(const Domain& domain, std::size_t n, std::uint64_t seed);

/// Uniform positions inside a sub-box of a box domain, all Moving.
SwarmState sample_region_state(const Domain& domain, const BoxDomain& region, std::size_t n,
                               std::uint64_t seed);

using SnapshotSink = std::function<void(const SwarmState&)>;

/// Runs the particle system from `initial` (sampled uniformly when empty) to t_final.
/// The sink sees the initial state, every snapshot_every-th step and the final state.
SwarmState run(const SimConfig& config, const ControlLaw& law, const FieldFamily& family,
               const Domain& domain, SwarmState initial, const SnapshotSink& sink = {});

}  // namespace swarmcov
