#include "krs/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "krs/barrier.hpp"
#include "krs/diagnostics.hpp"
#include "krs/io.hpp"
#include "krs/numerics.hpp"

namespace krs {

void FlowConfig::validate() const {
  if (!(s_max > s_min)) throw std::invalid_argument("flow: s_max > s_min required");
  if (points < static_cast<int>(kMinFlowPoints)) {
    throw std::invalid_argument("flow: at least " + std::to_string(kMinFlowPoints) +
                                " grid points required");
  }
  if (!(t_end >= 0.0)) throw std::invalid_argument("flow: t_end must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("flow: dt must be positive");
  if (diag_every < 1) throw std::invalid_argument("flow: diag_every must be >= 1");
  if (!(p >= 2.0)) throw std::invalid_argument("flow: p must be >= 2");
}

namespace {

// Derivative fields as the state stores them: central interior, one-sided
// second-order at both ends.
void state_fields(const std::vector<double>& b, double h, std::vector<double>& db,
                  std::vector<double>& d2b) {
  const std::size_t m = b.size();
  db.resize(m);
  d2b.resize(m);
  const double h2 = h * h;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    db[i] = (b[i + 1] - b[i - 1]) / (2.0 * h);
    d2b[i] = (b[i + 1] - 2.0 * b[i] + b[i - 1]) / h2;
  }
  db[0] = (-3.0 * b[0] + 4.0 * b[1] - b[2]) / (2.0 * h);
  db[m - 1] = (3.0 * b[m - 1] - 4.0 * b[m - 2] + b[m - 3]) / (2.0 * h);
  d2b[0] = (2.0 * b[0] - 5.0 * b[1] + 4.0 * b[2] - b[3]) / h2;
  d2b[m - 1] = (2.0 * b[m - 1] - 5.0 * b[m - 2] + 4.0 * b[m - 3] - b[m - 4]) / h2;
}

// Workspace for the stepping kernels; reused across steps to keep the
// implicit path allocation-free.
struct Scheme {
  const SolitonProfile& prof;
  int n;
  double h;
  std::size_t m;
  std::vector<double> db, d2b, Ar, At, F;
  std::vector<double> lo, di, up, rhs, scratch;
  std::vector<double> stage, k1, k2, k3, k4, predictor;

  Scheme(const SolitonProfile& p, int dim)
      : prof(p), n(dim), h(p.spacing()), m(p.size()) {
    for (auto* v : {&db, &d2b, &Ar, &At, &F, &lo, &di, &up, &rhs, &scratch, &stage,
                    &k1, &k2, &k3, &k4, &predictor}) {
      v->assign(m, 0.0);
    }
  }

  // Evolution stencils: Neumann ghost at the left (b' = 0, b'' = 2(b1-b0)/h^2),
  // frozen Dirichlet at the right (row not evolved).
  void scheme_fields(const std::vector<double>& b) {
    const double h2 = h * h;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      db[i] = (b[i + 1] - b[i - 1]) / (2.0 * h);
      d2b[i] = (b[i + 1] - 2.0 * b[i] + b[i - 1]) / h2;
    }
    db[0] = 0.0;
    d2b[0] = 2.0 * (b[1] - b[0]) / h2;
    db[m - 1] = 0.0;
    d2b[m - 1] = 0.0;
  }

  // Fills fields, coefficients and the discrete right side; false as soon
  // as parabolicity fails at an evolved row.
  bool prepare(const std::vector<double>& b) {
    scheme_fields(b);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double xr = prof.dphi[i], yr = d2b[i];
      const double xt = prof.phi[i], yt = db[i];
      if (!(xr + yr > 0.0) || !(xt + yt > 0.0)) return false;
      Ar[i] = averaged_inverse(xr, yr);
      At[i] = averaged_inverse(xt, yt);
      F[i] = std::log1p(yr / xr) + (n - 1) * std::log1p(yt / xt) + yt;
    }
    Ar[m - 1] = At[m - 1] = F[m - 1] = 0.0;
    return true;
  }

  // (I - dt/2 L) x = r with L's coefficients from the last prepare().
  void cn_solve(double dt, const std::vector<double>& r, std::vector<double>& x) {
    const double c = 0.5 * dt;
    const double h2 = h * h;
    di[0] = 1.0 + c * 2.0 * Ar[0] / h2;
    up[0] = -c * 2.0 * Ar[0] / h2;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const double drift = (n - 1) * At[i] + 1.0;
      lo[i] = -c * (Ar[i] / h2 - drift / (2.0 * h));
      di[i] = 1.0 + c * 2.0 * Ar[i] / h2;
      up[i] = -c * (Ar[i] / h2 + drift / (2.0 * h));
    }
    lo[m - 1] = 0.0;
    di[m - 1] = 1.0;
    up[m - 1] = 0.0;
    solve_tridiagonal(lo, di, up, r, x, scratch);
  }

  bool attempt_cn(const std::vector<double>& b, double dt, std::vector<double>& out) {
    if (!prepare(b)) return false;
    for (std::size_t i = 0; i < m; ++i) rhs[i] = b[i] + 0.5 * dt * F[i];
    cn_solve(dt, rhs, predictor);
    if (!prepare(predictor)) return false;  // one fixed-point correction
    out.resize(m);
    cn_solve(dt, rhs, out);
    return prepare(out);
  }

  bool attempt_rk4(const std::vector<double>& b, double dt, std::vector<double>& out) {
    if (!prepare(b)) return false;
    k1 = F;
    for (std::size_t i = 0; i < m; ++i) stage[i] = b[i] + 0.5 * dt * k1[i];
    if (!prepare(stage)) return false;
    k2 = F;
    for (std::size_t i = 0; i < m; ++i) stage[i] = b[i] + 0.5 * dt * k2[i];
    if (!prepare(stage)) return false;
    k3 = F;
    for (std::size_t i = 0; i < m; ++i) stage[i] = b[i] + dt * k3[i];
    if (!prepare(stage)) return false;
    k4 = F;
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = b[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return prepare(out);
  }

  bool attempt(const std::vector<double>& b, double dt, Stepper st,
               std::vector<double>& out) {
    return st == Stepper::crank_nicolson ? attempt_cn(b, dt, out)
                                         : attempt_rk4(b, dt, out);
  }
};

}  // namespace

RadialState make_state(std::shared_ptr<const SolitonProfile> base,
                       std::vector<double> b, double t) {
  if (!base) throw std::invalid_argument("make_state: null base profile");
  if (b.size() != base->size()) {
    throw std::invalid_argument("make_state: b size does not match the grid");
  }
  if (!profile_flow_ready(*base)) {
    throw std::invalid_argument("make_state: profile too coarse for flow stencils");
  }
  RadialState st;
  st.t = t;
  st.base = std::move(base);
  st.b = std::move(b);
  state_fields(st.b, st.base->spacing(), st.db, st.d2b);
  const SolitonProfile& p = *st.base;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (!(p.dphi[i] + st.d2b[i] > 0.0)) {
      throw ParabolicityError("parabolicity lost: phi' + b'' <= 0 at s=" +
                                  std::to_string(p.grid[i]),
                              i, p.grid[i]);
    }
    if (!(p.phi[i] + st.db[i] > 0.0)) {
      throw ParabolicityError("parabolicity lost: phi + b' <= 0 at s=" +
                                  std::to_string(p.grid[i]),
                              i, p.grid[i]);
    }
  }
  return st;
}

std::vector<double> radial_rhs(const RadialState& state) {
  const SolitonProfile& p = *state.base;
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double xr = p.dphi[i], yr = state.d2b[i];
    const double xt = p.phi[i], yt = state.db[i];
    if (!(xr + yr > 0.0) || !(xt + yt > 0.0)) {
      throw ParabolicityError("radial_rhs: log argument <= 0 at s=" +
                                  std::to_string(p.grid[i]),
                              i, p.grid[i]);
    }
    out[i] = std::log1p(yr / xr) + (p.n - 1) * std::log1p(yt / xt) + yt;
  }
  return out;
}

double cfl_limit(const RadialState& state, const FlowConfig& cfg) {
  const SolitonProfile& p = *state.base;
  double ar_max = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ar_max = std::max(ar_max, averaged_inverse(p.dphi[i], state.d2b[i]));
  }
  const double h = p.spacing();
  return cfg.tolerances.cfl_safety * h * h / ar_max;
}

RadialState step(const RadialState& state, double dt, const FlowConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (cfg.n != state.base->n) throw std::invalid_argument("step: config/base n mismatch");
  Scheme ws(*state.base, cfg.n);
  std::vector<double> out;
  double dte = dt;
  for (int k = 0; k <= cfg.tolerances.max_halvings; ++k) {
    if (ws.attempt(state.b, dte, cfg.stepper, out)) {
      return make_state(state.base, std::move(out), state.t + dte);
    }
    dte *= 0.5;
  }
  std::ostringstream msg;
  msg << "step: rejected after " << cfg.tolerances.max_halvings
      << " halvings from dt=" << dt << " at t=" << state.t;
  throw StepFailure(msg.str());
}

namespace {

void track_margins(const RadialState& st, double& rr, double& tt) {
  const SolitonProfile& p = *st.base;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    rr = std::min(rr, p.dphi[i] + st.d2b[i]);
    tt = std::min(tt, p.phi[i] + st.db[i]);
  }
}

}  // namespace

RunResult run_flow(const RadialState& initial, const FlowConfig& cfg,
                   const FlowObserver* observer) {
  cfg.validate();
  if (cfg.n != initial.base->n) {
    throw std::invalid_argument("run_flow: config/base n mismatch");
  }
  const FlowTolerances& tl = cfg.tolerances;
  const bool adaptive = tl.step_rtol > 0.0;

  RunResult out;
  out.final_state = initial;
  const double sup0 = *std::max_element(initial.b.begin(), initial.b.end());
  out.crossing_level =
      cfg.crossing_level >= 0.0 ? cfg.crossing_level : 0.5 * std::max(sup0, 0.0);

  out.margin_rr_initial = out.margin_tt_initial = std::numeric_limits<double>::max();
  track_margins(initial, out.margin_rr_initial, out.margin_tt_initial);
  out.margin_rr_min = out.margin_rr_initial;
  out.margin_tt_min = out.margin_tt_initial;

  auto emit = [&](const RadialState& st) {
    DiagnosticSample s = make_sample(st, cfg.p, out.crossing_level);
    out.series.samples.push_back(s);
    if (observer && observer->on_sample) observer->on_sample(s);
  };

  std::vector<double> checkpoints = cfg.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                    checkpoints.end());
  std::size_t next_cp = 0;
  while (next_cp < checkpoints.size() && checkpoints[next_cp] <= 0.0) ++next_cp;

  emit(initial);
  if (next_cp < checkpoints.size() && checkpoints[next_cp] == 0.0) ++next_cp;
  if (cfg.t_end <= 0.0) {
    out.completed = true;
    return out;
  }

  Scheme ws(*initial.base, cfg.n);
  RadialState state = initial;
  double dt = cfg.dt;
  int consecutive = 0;
  int halvings = 0;
  std::vector<double> y_full, y_half, y_tmp;
  const double time_eps = 1e-12 * std::max(1.0, cfg.t_end);

  while (state.t < cfg.t_end - time_eps) {
    double dt_try = std::min(dt, tl.dt_max);
    if (cfg.stepper == Stepper::explicit_rk4) {
      dt_try = std::min(dt_try, cfl_limit(state, cfg));
    }
    double horizon = cfg.t_end;
    if (next_cp < checkpoints.size() && checkpoints[next_cp] < horizon) {
      horizon = checkpoints[next_cp];
    }
    dt_try = std::min(dt_try, horizon - state.t);

    bool accept = ws.attempt(state.b, dt_try, cfg.stepper, y_full);
    if (accept && adaptive) {
      // step doubling: compare against two half steps; reuse the half result
      accept = ws.attempt(state.b, 0.5 * dt_try, cfg.stepper, y_tmp) &&
               ws.attempt(y_tmp, 0.5 * dt_try, cfg.stepper, y_half);
      if (accept) {
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < y_full.size(); ++i) {
          err = std::max(err, std::abs(y_full[i] - y_half[i]));
          scale = std::max(scale, std::abs(y_half[i]));
        }
        err /= 3.0;  // second-order steppers
        accept = err <= tl.step_atol + tl.step_rtol * scale;
        if (accept) y_full = y_half;
      }
    }

    if (!accept) {
      ++out.rejected;
      ++halvings;
      if (halvings > tl.max_halvings) {
        out.stop_reason = "step rejected after " + std::to_string(tl.max_halvings) +
                          " halvings at t=" + std::to_string(state.t);
        break;
      }
      dt = 0.5 * dt_try;
      consecutive = 0;
      continue;
    }

    halvings = 0;
    double t_new = state.t + dt_try;
    const bool at_cp =
        next_cp < checkpoints.size() && std::abs(t_new - checkpoints[next_cp]) <= time_eps;
    if (at_cp) t_new = checkpoints[next_cp];
    if (std::abs(t_new - cfg.t_end) <= time_eps) t_new = cfg.t_end;
    state = make_state(state.base, y_full, t_new);
    ++out.steps;
    track_margins(state, out.margin_rr_min, out.margin_tt_min);

    if (adaptive && ++consecutive >= tl.grow_after) {
      dt = std::min(dt * tl.dt_growth, tl.dt_max);
      consecutive = 0;
    }

    if (at_cp) {
      if (observer && observer->on_checkpoint) {
        observer->on_checkpoint(checkpoints[next_cp], state);
      }
      ++next_cp;
    }
    if (out.steps % cfg.diag_every == 0 && state.t < cfg.t_end - time_eps) {
      emit(state);
    }
  }

  if (out.stop_reason.empty()) {
    out.completed = true;
    emit(state);
  } else {
    emit(state);
  }
  out.final_state = std::move(state);
  return out;
}

double smoothstep_bump(double s, double center, double width, double height) {
  const double u = 1.0 - std::abs((s - center) / width);
  if (u <= 0.0) return 0.0;
  const double v = std::min(u, 1.0);
  return height * v * v * v * (10.0 + v * (-15.0 + 6.0 * v));
}

RadialState make_initial_perturbation(std::shared_ptr<const SolitonProfile> base,
                                      const InitialSpec& spec) {
  if (!base) throw std::invalid_argument("make_initial_perturbation: null base");
  const std::vector<double>& grid = base->grid;
  std::vector<double> b(grid.size(), 0.0);

  switch (spec.kind) {
    case InitialKind::compact_bump: {
      if (!(spec.width > 0.0)) {
        throw std::invalid_argument("compact_bump: width must be positive");
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        b[i] = smoothstep_bump(grid[i], spec.center, spec.width, spec.height);
      }
      break;
    }
    case InitialKind::barrier_upper:
    case InitialKind::barrier_lower: {
      const Side side =
          spec.kind == InitialKind::barrier_upper ? Side::upper : Side::lower;
      double R = spec.R;
      if (R <= 0.0) {
        AdmissibleRResult found =
            find_admissible_R(base->n, spec.K, spec.alpha, side, spec.R_max);
        if (!found.found) {
          throw std::runtime_error("make_initial_perturbation: no admissible R <= " +
                                   std::to_string(spec.R_max));
        }
        R = found.R;
      }
      BarrierSpec bs{spec.K, spec.alpha, R, side, base->n};
      BarrierProfile bp = build_barrier(*base, bs);
      if (side == Side::lower) {
        // positivity guard ahead of flow use: phi_b must clear 1e-6 * phi
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!(bp.phib[i] >= 1e-6 * base->phi[i])) {
            throw ParabolicityError(
                "lower barrier: phi_b margin below 1e-6 phi at s=" +
                    std::to_string(grid[i]),
                i, grid[i]);
          }
        }
      }
      b = bp.bhat;
      break;
    }
    case InitialKind::from_file: {
      StateCsv file = read_state_csv(spec.path);
      if (file.grid.size() != grid.size()) {
        throw std::invalid_argument("from_file: grid size mismatch with base profile");
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(file.grid[i] - grid[i]) > 1e-9 * (1.0 + std::abs(grid[i]))) {
          throw std::invalid_argument("from_file: grid mismatch at row " +
                                      std::to_string(i));
        }
      }
      b = std::move(file.b);
      break;
    }
  }
  return make_state(std::move(base), std::move(b), 0.0);
}

}  // namespace krs
