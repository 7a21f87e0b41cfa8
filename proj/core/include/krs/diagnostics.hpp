#pragma once

/// Convergence functionals evaluated on flow states: sup/inf/oscillation,
/// the monotone L^p functional in radial form, metric-equivalence ratios,
/// and monotonicity / level-crossing counters.
///
/// The L^p functional integrates |bhat|^p against the determinant of the
/// interpolated metric. Radially the metric has eigenvalues 1/(|z|^2 A_r)
/// and 1/(|z|^2 A_t) (multiplicity n-1), so with Lebesgue volume
/// r^(2n-1) dr = (1/2) e^(ns) ds the |z| powers cancel and
///
///     I_p = c_n * integral |bhat|^p A_r^(-1) A_t^(-(n-1)) ds,
///
/// with the normalization c_n fixed to 1 (monotonicity in time does not
/// depend on the constant).

#include "krs/flow.hpp"

namespace krs {

struct Oscillation {
  double sup;
  double inf;
  double osc;
};

Oscillation oscillation(const RadialState& state);

/// Composite-Simpson value of the radial L^p functional; requires p >= 2
/// and strict parabolicity.
double lp_quantity(const RadialState& state, double p);

/// Tail exponent of the integrand, n - 1 - alpha p; the grid-truncated
/// integral approximates a convergent one iff this is < -1.
double lp_tail_exponent(int n, double alpha, double p);

struct EquivalenceRatios {
  double rr_min, rr_max;  // (phi' + b'') / phi'
  double tt_min, tt_max;  // (phi  + b')  / phi
};

EquivalenceRatios equivalence_ratios(const RadialState& state);

struct MonotoneCrossings {
  bool monotone;    // b nonincreasing along the grid (tolerance 1e-12 * scale)
  long crossings;   // sign changes of b - level, dead band 1e-12 * scale
};

MonotoneCrossings monotone_and_sign_changes(const RadialState& state, double level);

/// Assembles one diagnostics record from a state.
DiagnosticSample make_sample(const RadialState& state, double p, double level);

}  // namespace krs
