#include "krs/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "krs/numerics.hpp"

namespace krs {

void BarrierSpec::validate() const {
  if (!(K >= 0.0)) throw std::invalid_argument("barrier: K must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("barrier: alpha must lie in (0, 1)");
  }
  if (!(R >= 0.5)) throw std::invalid_argument("barrier: R must be >= 1/2");
  if (n < 2) {
    throw std::invalid_argument(
        "barrier: construction requires complex dimension n >= 2");
  }
}

namespace {

// exp(-1/t) on a jet; zero jet for t <= 0. Below 1/700 the value underflows
// to zero anyway and the polynomial prefactors would overflow, so cut there.
Jet3 bump_factor(const Jet3& t) {
  if (t.f < 1.0 / 700.0) return {};
  return exp(Jet3::constant(-1.0) / t);
}

struct PerturbationJet {
  double g0, g1, g2, g3;  // g and its first three s-derivatives
};

// g(s) = K alpha (2R)^alpha s^(-1-alpha) psi(s/R); zero for s <= R.
PerturbationJet perturbation_jet(const BarrierSpec& spec, double s) {
  if (s <= spec.R || spec.K == 0.0) return {0.0, 0.0, 0.0, 0.0};
  const CutoffJet c = cutoff_psi(s / spec.R);
  const double R = spec.R;
  const double psi0 = c.psi;
  const double psi1 = c.dpsi / R;
  const double psi2 = c.d2psi / (R * R);
  const double psi3 = c.d3psi / (R * R * R);
  const double a = spec.alpha;
  const double p = spec.K * a * std::pow(2.0 * R, a) * std::pow(s, -1.0 - a);
  const double p1 = -(1.0 + a) * p / s;
  const double p2 = (1.0 + a) * (2.0 + a) * p / (s * s);
  const double p3 = -(1.0 + a) * (2.0 + a) * (3.0 + a) * p / (s * s * s);
  return {p * psi0,
          p1 * psi0 + p * psi1,
          p2 * psi0 + 2.0 * p1 * psi1 + p * psi2,
          p3 * psi0 + 3.0 * p2 * psi1 + 3.0 * p1 * psi2 + p * psi3};
}

double side_sign(Side side) { return side == Side::upper ? 1.0 : -1.0; }

}  // namespace

CutoffJet cutoff_psi(double x) {
  if (!std::isfinite(x)) throw std::domain_error("cutoff_psi: x must be finite");
  if (x <= 1.0) return {0.0, 0.0, 0.0, 0.0};
  if (x >= 2.0) return {1.0, 0.0, 0.0, 0.0};
  const Jet3 g1 = bump_factor({x - 1.0, 1.0, 0.0, 0.0});
  const Jet3 g2 = bump_factor({2.0 - x, -1.0, 0.0, 0.0});
  const Jet3 psi = g1 / (g1 + g2);
  return {psi.f, psi.d1, psi.d2, psi.d3};
}

BarrierProfile build_barrier(const SolitonProfile& base, const BarrierSpec& spec) {
  spec.validate();
  if (base.n != spec.n) {
    std::ostringstream msg;
    msg << "build_barrier: base profile has n=" << base.n << ", spec has n=" << spec.n;
    throw std::invalid_argument(msg.str());
  }
  const std::size_t m = base.size();
  BarrierProfile bp;
  bp.spec = spec;
  bp.base = &base;
  bp.phib.resize(m);
  bp.dphib.resize(m);
  bp.d2phib.resize(m);
  bp.d3phib.resize(m);
  bp.bhat.resize(m);

  const double sgn = side_sign(spec.side);
  for (std::size_t i = 0; i < m; ++i) {
    const PerturbationJet g = perturbation_jet(spec, base.grid[i]);
    bp.phib[i] = base.phi[i] - sgn * g.g0;
    bp.dphib[i] = base.dphi[i] - sgn * g.g1;
    bp.d2phib[i] = base.d2phi[i] - sgn * g.g2;
    bp.d3phib[i] = base.d3phi[i] - sgn * g.g3;
  }

  // bhat by cumulative Gauss-Legendre cells from the right boundary value;
  // the segment beyond the grid is handled by barrier_perturbation.
  static constexpr double kx[4] = {0.0, 0.4058451513773972, 0.7415311855993945,
                                   0.9491079123427585};
  static constexpr double kw[4] = {0.4179591836734694, 0.3818300505051189,
                                   0.2797053914892766, 0.1294849661688697};
  auto integrand = [&spec](double s) {
    return perturbation_jet(spec, s).g0;
  };
  double acc = barrier_perturbation(spec, base.grid.back());
  bp.bhat[m - 1] = sgn * acc;
  for (std::size_t i = m - 1; i-- > 0;) {
    const double a = base.grid[i], b = base.grid[i + 1];
    // the integrand is supported on [R, inf)
    if (b > spec.R && spec.K != 0.0) {
      const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
      double cell = kw[0] * integrand(c);
      for (int q = 1; q < 4; ++q) {
        cell += kw[q] * (integrand(c - hw * kx[q]) + integrand(c + hw * kx[q]));
      }
      acc += hw * cell;
    }
    bp.bhat[i] = sgn * acc;
  }
  return bp;
}

double barrier_perturbation(const BarrierSpec& spec, double s, double quad_tol) {
  spec.validate();
  if (!(s > 0.0)) {
    throw std::domain_error("barrier_perturbation: s must be positive");
  }
  if (spec.K == 0.0) return 0.0;
  const double a = spec.alpha;
  const double s_tail = std::max(s, 2.0 * spec.R);
  double value = spec.K * std::pow(2.0 * spec.R, a) * std::pow(s_tail, -a);
  const double lo = std::max(s, spec.R);
  if (lo < 2.0 * spec.R) {
    value += adaptive_simpson(
        [&spec](double sigma) { return perturbation_jet(spec, sigma).g0; }, lo,
        2.0 * spec.R, quad_tol);
  }
  return value;
}

CertificationReport certify_barrier(const BarrierProfile& bp) {
  const SolitonProfile& base = *bp.base;
  CertificationReport rep;
  rep.spec = bp.spec;
  rep.margins = {MarginRecord{"phib", 0, 0}, MarginRecord{"dphib", 0, 0},
                 MarginRecord{"phib-dphib", 0, 0},
                 MarginRecord{"dphib^2-phib*d2phib", 0, 0},
                 MarginRecord{"d2phib^2-dphib*d3phib", 0, 0}};
  const std::size_t m = base.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double pb = bp.phib[i], db = bp.dphib[i];
    const double d2 = bp.d2phib[i], d3 = bp.d3phib[i];
    const double vals[5] = {pb, db, pb - db, db * db - pb * d2, d2 * d2 - db * d3};
    for (int k = 0; k < 5; ++k) {
      if (i == 0 || vals[k] < rep.margins[k].min) {
        rep.margins[k].min = vals[k];
        rep.margins[k].s_at_min = base.grid[i];
      }
    }
    const double eq_phi = pb / base.phi[i];
    const double eq_dphi = db / base.dphi[i];
    if (i == 0) {
      rep.eq_phi_min = rep.eq_phi_max = eq_phi;
      rep.eq_dphi_min = rep.eq_dphi_max = eq_dphi;
    } else {
      rep.eq_phi_min = std::min(rep.eq_phi_min, eq_phi);
      rep.eq_phi_max = std::max(rep.eq_phi_max, eq_phi);
      rep.eq_dphi_min = std::min(rep.eq_dphi_min, eq_dphi);
      rep.eq_dphi_max = std::max(rep.eq_dphi_max, eq_dphi);
    }
  }
  rep.certified = true;
  for (const auto& mr : rep.margins) rep.certified = rep.certified && mr.min > 0.0;
  return rep;
}

std::vector<double> certification_grid(double R, double s_min, double s_max) {
  if (!(s_min > 0.0) || !(s_max > s_min)) {
    throw std::invalid_argument("certification_grid: need 0 < s_min < s_max");
  }
  std::vector<double> g;
  g.push_back(s_min);
  auto append = [&g](double a, double b, double hmax) {
    if (!(b > a)) return;
    const int cells = std::max(1, static_cast<int>(std::ceil((b - a) / hmax)));
    for (int i = 1; i <= cells; ++i) g.push_back(a + (b - a) * i / cells);
  };
  const double band_lo = std::clamp(R, s_min, s_max);
  const double band_hi = std::clamp(2.0 * R, band_lo, s_max);
  append(s_min, band_lo, 0.05);
  append(band_lo, band_hi, 0.01 * R);
  append(band_hi, s_max, 0.05);
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

AdmissibleRResult find_admissible_R(int n, double K, double alpha, Side side,
                                    double R_max, double s_min, double tol) {
  if (!(R_max >= 0.5)) throw std::invalid_argument("find_admissible_R: R_max >= 1/2 required");
  BarrierSpec spec{K, alpha, 0.5, side, n};
  spec.validate();

  AdmissibleRResult out;
  auto certify_at = [&](double R) {
    spec.R = R;
    SolitonProfile prof =
        build_profile_on_grid(n, certification_grid(R, s_min, 8.0 * R), tol);
    BarrierProfile bp = build_barrier(prof, spec);
    ++out.certifications;
    return certify_barrier(bp);
  };

  // geometric ladder
  double fail_R = 0.0;
  double pass_R = 0.0;
  for (double R = 0.5; R <= R_max * (1.0 + 1e-12); R = (R < 1.0 ? 1.0 : 2.0 * R)) {
    CertificationReport rep = certify_at(R);
    if (rep.certified) {
      pass_R = R;
      out.report = rep;
      break;
    }
    fail_R = R;
    out.report = rep;
  }
  if (pass_R == 0.0) {
    out.found = false;
    return out;
  }
  if (fail_R == 0.0) {  // smallest allowed R already certifies
    out.found = true;
    out.R = pass_R;
    return out;
  }

  // bisection refinement to 1% on the final bracket
  double lo = fail_R, hi = pass_R;
  CertificationReport best = out.report;
  while (hi - lo > 0.01 * hi) {
    const double mid = 0.5 * (lo + hi);
    CertificationReport rep = certify_at(mid);
    if (rep.certified) {
      hi = mid;
      best = rep;
    } else {
      lo = mid;
    }
  }
  out.found = true;
  out.R = hi;
  out.report = best;
  return out;
}

AdmissibleRResult find_admissible_R(const SolitonProfile& base, double K,
                                    double alpha, Side side, double R_max) {
  const double s_min = base.grid.front() > 0.0 ? base.grid.front() : 0.1;
  return find_admissible_R(base.n, K, alpha, side, R_max, s_min, base.tol);
}

bool check_initial_decay(const std::vector<double>& grid,
                         const std::vector<double>& u, double K, double alpha) {
  if (grid.size() != u.size()) {
    throw std::invalid_argument("check_initial_decay: grid/u size mismatch");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const double bound = s > 0.0 ? K * std::min(1.0, std::pow(s, -alpha)) : K;
    if (std::abs(u[i]) > bound) return false;
  }
  return true;
}

}  // namespace krs
