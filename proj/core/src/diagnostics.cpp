#include "krs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "krs/numerics.hpp"

namespace krs {

Oscillation oscillation(const RadialState& state) {
  const auto [lo, hi] = std::minmax_element(state.b.begin(), state.b.end());
  return {*hi, *lo, *hi - *lo};
}

double lp_quantity(const RadialState& state, double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("lp_quantity: p >= 2 required");
  const SolitonProfile& prof = *state.base;
  const std::size_t m = prof.size();
  std::vector<double> integrand(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double xr = prof.dphi[i], yr = state.d2b[i];
    const double xt = prof.phi[i], yt = state.db[i];
    if (!(xr + yr > 0.0) || !(xt + yt > 0.0)) {
      throw ParabolicityError("lp_quantity: parabolicity violated at s=" +
                                  std::to_string(prof.grid[i]),
                              i, prof.grid[i]);
    }
    const double ar = averaged_inverse(xr, yr);
    const double at = averaged_inverse(xt, yt);
    integrand[i] =
        std::pow(std::abs(state.b[i]), p) / (ar * std::pow(at, prof.n - 1));
  }
  return composite_simpson(integrand, state.spacing());
}

double lp_tail_exponent(int n, double alpha, double p) {
  return n - 1 - alpha * p;
}

EquivalenceRatios equivalence_ratios(const RadialState& state) {
  const SolitonProfile& prof = *state.base;
  EquivalenceRatios r{};
  for (std::size_t i = 0; i < prof.size(); ++i) {
    const double rr = (prof.dphi[i] + state.d2b[i]) / prof.dphi[i];
    const double tt = (prof.phi[i] + state.db[i]) / prof.phi[i];
    if (i == 0) {
      r.rr_min = r.rr_max = rr;
      r.tt_min = r.tt_max = tt;
    } else {
      r.rr_min = std::min(r.rr_min, rr);
      r.rr_max = std::max(r.rr_max, rr);
      r.tt_min = std::min(r.tt_min, tt);
      r.tt_max = std::max(r.tt_max, tt);
    }
  }
  return r;
}

MonotoneCrossings monotone_and_sign_changes(const RadialState& state, double level) {
  double scale = 0.0;
  for (double v : state.b) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * scale;

  MonotoneCrossings out{true, 0};
  for (std::size_t i = 1; i < state.b.size(); ++i) {
    if (state.b[i] > state.b[i - 1] + tol) {
      out.monotone = false;
      break;
    }
  }
  int last_sign = 0;
  for (double v : state.b) {
    const double d = v - level;
    const int sign = d > tol ? 1 : (d < -tol ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) ++out.crossings;
      last_sign = sign;
    }
  }
  return out;
}

DiagnosticSample make_sample(const RadialState& state, double p, double level) {
  const Oscillation o = oscillation(state);
  const EquivalenceRatios eq = equivalence_ratios(state);
  const MonotoneCrossings mc = monotone_and_sign_changes(state, level);
  DiagnosticSample s;
  s.t = state.t;
  s.sup = o.sup;
  s.inf = o.inf;
  s.osc = o.osc;
  s.lp = lp_quantity(state, p);
  s.eq_rr_min = eq.rr_min;
  s.eq_rr_max = eq.rr_max;
  s.eq_tt_min = eq.tt_min;
  s.eq_tt_max = eq.tt_max;
  s.monotone = mc.monotone;
  s.sign_changes = mc.crossings;
  return s;
}

}  // namespace krs
