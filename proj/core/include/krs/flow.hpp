#pragma once

/// Normalized radial flow for perturbations of the soliton potential.
///
/// With phi = u0', phi' = u0'' from the base profile, the potential-level
/// perturbation bhat evolves by
///
///     d/dt bhat = log((phi' + bhat'')/phi')
///               + (n-1) log((phi + bhat')/phi) + bhat',
///
/// for which the zero perturbation is a stationary solution. Writing each
/// log through the interpolated-inverse coefficients
///
///     A_r = integral_0^1 dtau/(phi' + tau bhat''),
///     A_t = integral_0^1 dtau/(phi  + tau bhat'),
///
/// the right side equals A_r bhat'' + ((n-1) A_t + 1) bhat' identically,
/// which is the linearized tridiagonal structure the implicit stepper uses.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "krs/soliton.hpp"

namespace krs {

struct ParabolicityError : std::runtime_error {
  ParabolicityError(const std::string& what, std::size_t index, double s)
      : std::runtime_error(what), index(index), s(s) {}
  std::size_t index;
  double s;
};

struct StepFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Perturbation bhat and its finite-difference spatial derivatives at one
/// time. Interior derivatives are second-order central; the end rows use
/// one-sided second-order stencils. Immutable once built.
struct RadialState {
  double t = 0.0;
  std::shared_ptr<const SolitonProfile> base;
  std::vector<double> b;
  std::vector<double> db;
  std::vector<double> d2b;

  const std::vector<double>& grid() const { return base->grid; }
  double spacing() const { return base->spacing(); }
};

/// Builds a state from values of b, filling db/d2b and checking strict
/// parabolicity (phi' + b'' > 0 and phi + b' > 0) at interior points.
/// Throws ParabolicityError with the first violating location.
RadialState make_state(std::shared_ptr<const SolitonProfile> base,
                       std::vector<double> b, double t = 0.0);

enum class Stepper { explicit_rk4, crank_nicolson };
enum class LeftBc { neumann_zero };
enum class RightBc { dirichlet_frozen };

struct FlowTolerances {
  double step_rtol = 1e-7;   // step-doubling error control; <= 0 disables
  double step_atol = 1e-12;
  double dt_max = 0.25;
  double dt_growth = 1.25;   // growth factor after consecutive accepts
  int grow_after = 10;       // consecutive accepts before growing dt
  int max_halvings = 20;
  double cfl_safety = 0.5;   // explicit stability fraction of h^2/max(A_r)
};

struct FlowConfig {
  int n = 2;
  double s_min = -10.0;
  double s_max = 60.0;
  int points = 1401;
  double t_end = 1.0;
  double dt = 0.01;
  Stepper stepper = Stepper::crank_nicolson;
  LeftBc bc_left = LeftBc::neumann_zero;
  RightBc bc_right = RightBc::dirichlet_frozen;
  int diag_every = 10;
  double p = 8.0;                    // L^p exponent for the decay functional
  std::vector<double> checkpoints;   // snapshot times
  FlowTolerances tolerances;
  double crossing_level = -1.0;      // level for crossing counts; < 0 = sup(b0)/2
  double solver_tol = 1e-12;

  void validate() const;
};

/// Pointwise flow right side evaluated from the state's derivative fields.
/// Throws ParabolicityError where an argument of a log is non-positive.
std::vector<double> radial_rhs(const RadialState& state);

/// One accepted time step. Attempts dt; on parabolicity violation halves
/// and retries (at most tolerances.max_halvings, then StepFailure). The
/// returned state advanced by whatever step size was accepted.
///   crank_nicolson: solves the linearized tridiagonal system with
///     coefficients frozen at the current state, then one fixed-point
///     correction with coefficients re-frozen at the predictor.
///   explicit_rk4: classic four-stage step; subject to the stability bound
///     dt <= cfl_safety * h^2 / max(A_r).
RadialState step(const RadialState& state, double dt, const FlowConfig& cfg);

/// Explicit stability bound for the current state.
double cfl_limit(const RadialState& state, const FlowConfig& cfg);

struct DiagnosticSample {
  double t;
  double sup, inf, osc;
  double lp;
  double eq_rr_min, eq_rr_max, eq_tt_min, eq_tt_max;
  bool monotone;
  long sign_changes;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticSample> samples;
};

/// Observer hooks; either may be empty.
struct FlowObserver {
  std::function<void(const DiagnosticSample&)> on_sample;
  std::function<void(double, const RadialState&)> on_checkpoint;
};

struct RunResult {
  DiagnosticsSeries series;
  RadialState final_state;
  bool completed = false;
  std::string stop_reason;  // empty when completed
  long steps = 0;
  long rejected = 0;
  // parabolicity margins min over the run (absolute)
  double margin_rr_initial = 0.0, margin_rr_min = 0.0;
  double margin_tt_initial = 0.0, margin_tt_min = 0.0;
  double crossing_level = 0.0;
};

/// Integrates to cfg.t_end, sampling diagnostics every diag_every accepted
/// steps (plus t = 0 and t_end) and emitting checkpoint snapshots at the
/// configured times. Early termination is recorded, not thrown.
RunResult run_flow(const RadialState& initial, const FlowConfig& cfg,
                   const FlowObserver* observer = nullptr);

enum class InitialKind { barrier_upper, barrier_lower, compact_bump, from_file };

struct InitialSpec {
  InitialKind kind = InitialKind::compact_bump;
  // barrier parameters
  double K = 0.1;
  double alpha = 0.5;
  double R = 0.0;        // <= 0 requests an admissible-R search
  double R_max = 1024.0;
  // bump parameters (C^2 smoothstep bump)
  double center = 15.0;
  double width = 8.0;
  double height = 0.0;
  // file source
  std::string path;
};

/// Builds initial states on the base grid. Barrier kinds copy the barrier
/// module's bhat sequence; compact_bump is the quintic-smoothstep bump;
/// from_file reads a state snapshot CSV (column b) on a matching grid.
RadialState make_initial_perturbation(std::shared_ptr<const SolitonProfile> base,
                                      const InitialSpec& spec);

/// C^2 bump: height * S(1 - |s-center|/width) with the quintic smoothstep S.
double smoothstep_bump(double s, double center, double width, double height);

}  // namespace krs
