#include "krs/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace krs {

namespace {

constexpr double kMaxExpArg = 709.0;       // log(DBL_MAX) ~ 709.78
constexpr double kLogSpaceThreshold = 600.0;  // switch to log-space beyond this n*s
constexpr double kSmallSFloor = -27.631021115928548;  // log(1e-12)
constexpr int kMaxDim = 20;                // n! stays exactly representable

void check_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw std::domain_error("soliton: complex dimension n must be in [1, " +
                            std::to_string(kMaxDim) + "], got " + std::to_string(n));
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// P(phi) = sum_{k=0}^{n-1} (-1)^(n-k-1) (n!/k!) phi^k, by Horner.
double implicit_poly(int n, double phi) {
  // coefficient of phi^k is (-1)^(n-k-1) n!/k!; build from the top down
  double acc = n;  // k = n-1 term: n!/(n-1)! = n, sign +1
  double coef = n;
  for (int k = n - 2; k >= 0; --k) {
    coef *= (k + 1);  // n!/k!
    const double sign = ((n - k - 1) % 2 == 0) ? 1.0 : -1.0;
    acc = acc * phi + sign * coef;
  }
  return acc;
}

// d/dphi P: coefficient of phi^(k-1) is k (-1)^(n-k-1) n!/k! = (-1)^(n-k-1) n!/(k-1)!
double implicit_poly_deriv(int n, double phi) {
  if (n == 1) return 0.0;
  double acc = n * (n - 1.0);  // k = n-1 term: n!/(n-2)!, sign +1
  double coef = n * (n - 1.0);
  for (int k = n - 2; k >= 1; --k) {
    coef *= k;  // n!/(k-1)!
    const double sign = ((n - k - 1) % 2 == 0) ? 1.0 : -1.0;
    acc = acc * phi + sign * coef;
  }
  return acc;
}

// T(phi) = n phi^(-n) * integral_0^phi t^(n-1) e^t dt
//        = sum_j n/((n+j) j!) phi^j,  and its derivative.
// Rewrites the implicit equation constant-free as n log(phi) + log(T) = ns,
// which stays perfectly conditioned where e^(ns) is dominated by n!.
struct TailSeries {
  double value;
  double deriv;
};

TailSeries tail_series(int n, double phi) {
  double t = 1.0;  // phi^j / j!
  double v = n / static_cast<double>(n);
  double d = 0.0;
  for (int j = 1; j < 400; ++j) {
    t *= phi / j;
    const double c = n / static_cast<double>(n + j);
    v += c * t;
    d += c * t * j / phi;
    if (j > phi && c * t < 1e-18 * v) break;
  }
  return {v, d};
}

struct Objective {
  // f(phi) with consistent sign: negative left of the root, positive right.
  // Sentinels keep bisection safe where direct evaluation would overflow.
  enum class Mode { series, linear, log_space };
  int n;
  double ns;
  Mode mode;
  double rhs_linear = 0.0;  // e^(ns) + (-1)^(n-1) n!
  double log_rhs = 0.0;     // log of the right side (log-space path)

  static Objective make(int n, double s) {
    Objective f;
    f.n = n;
    f.ns = n * static_cast<double>(s);
    const double log_nfact = std::lgamma(n + 1.0);
    if (f.ns <= std::min(600.0, log_nfact + 40.0)) {
      f.mode = Mode::series;
    } else if (f.ns <= kLogSpaceThreshold) {
      f.mode = Mode::linear;
      f.rhs_linear = std::exp(f.ns) + ((n % 2 == 1) ? factorial(n) : -factorial(n));
    } else {
      f.mode = Mode::log_space;
      const double c = (n % 2 == 1) ? factorial(n) : -factorial(n);
      f.log_rhs = f.ns + ((f.ns < 700.0) ? std::log1p(c * std::exp(-f.ns)) : 0.0);
    }
    return f;
  }

  double value(double phi) const {
    switch (mode) {
      case Mode::series:
        return n * std::log(phi) + std::log(tail_series(n, phi).value) - ns;
      case Mode::linear: {
        const double p = implicit_poly(n, phi);
        if (p > 0.0 && std::log(p) + phi > kMaxExpArg - 1.0) {
          return std::numeric_limits<double>::max();
        }
        return p * std::exp(phi) - rhs_linear;
      }
      case Mode::log_space: {
        const double p = implicit_poly(n, phi);
        if (p <= 0.0) return -std::numeric_limits<double>::max();
        return std::log(p) + phi - log_rhs;
      }
    }
    return 0.0;
  }

  double derivative(double phi) const {
    switch (mode) {
      case Mode::series: {
        const TailSeries t = tail_series(n, phi);
        return n / phi + t.deriv / t.value;
      }
      case Mode::linear:
        // d/dphi [P e^phi] = n phi^(n-1) e^phi
        return n * std::pow(phi, n - 1) * std::exp(phi);
      case Mode::log_space: {
        const double p = implicit_poly(n, phi);
        return implicit_poly_deriv(n, phi) / p + 1.0;
      }
    }
    return 0.0;
  }

  double rel_residual(double phi) const {
    if (mode == Mode::linear) {
      return std::abs(value(phi)) / (std::exp(ns) + factorial(n));
    }
    return std::abs(value(phi));  // log-form residuals are already relative
  }
};

}  // namespace

double implicit_lhs(int n, double phi) {
  check_dim(n);
  if (!(phi >= 0.0)) {
    throw std::domain_error("implicit_lhs: phi must be >= 0");
  }
  if (phi > kMaxExpArg) {
    throw std::range_error("implicit_lhs: e^phi overflows for phi = " +
                           std::to_string(phi));
  }
  return implicit_poly(n, phi) * std::exp(phi);
}

double solve_phi(int n, double s, double tol) {
  check_dim(n);
  if (!std::isfinite(s)) throw std::domain_error("solve_phi: s must be finite");
  if (!(tol > 0.0)) throw std::domain_error("solve_phi: tol must be positive");

  // Small-s floor: phi^n (1 + O(phi)) = e^(ns), so phi = e^s to below tol.
  if (s < kSmallSFloor) return std::exp(s);

  const double ns = n * static_cast<double>(s);
  const Objective f = Objective::make(n, s);

  const double eps_floor = 1e-300;
  double lo = std::max(eps_floor, ns - 10.0 * (1.0 + std::abs(s)));
  double hi = ns + 10.0 * (1.0 + std::abs(s));
  if (hi <= lo) hi = lo + 1.0;

  double flo = f.value(lo);
  double fhi = f.value(hi);
  int widen = 0;
  while (std::signbit(flo) == std::signbit(fhi) && widen < 64) {
    lo = std::max(eps_floor, 0.5 * lo);
    hi = 2.0 * hi;
    flo = f.value(lo);
    fhi = f.value(hi);
    ++widen;
  }
  if (std::signbit(flo) == std::signbit(fhi)) {
    std::ostringstream msg;
    msg << "solve_phi: no bracket for n=" << n << ", s=" << s << " in ["
        << lo << ", " << hi << "]; f(lo)=" << flo << ", f(hi)=" << fhi;
    throw SolitonSolveError(msg.str());
  }
  // orient so that f(lo) < 0 < f(hi); f is increasing in phi
  if (flo > 0.0) std::swap(lo, hi);

  // Bisection to locate, then safeguarded Newton to machine precision.
  for (int i = 0; i < 80 && std::abs(hi - lo) > 1e-6 * (1.0 + std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (f.value(mid) < 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double fx = f.value(x);
    (fx < 0.0 ? lo : hi) = x;
    const double dfx = f.derivative(x);
    double xn = (dfx != 0.0 && std::isfinite(dfx)) ? x - fx / dfx : 0.5 * (lo + hi);
    const double blo = std::min(lo, hi), bhi = std::max(lo, hi);
    if (!(xn > blo && xn < bhi)) xn = 0.5 * (blo + bhi);
    const double dx = std::abs(xn - x);
    x = xn;
    // relative stop: roots range over ~1e-12 .. 1e3
    if (dx <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
  }

  // Log-form residuals are computed by subtracting n*s, so they cannot be
  // resolved below the rounding of that subtraction; allow that floor.
  double tol_eff = tol;
  if (f.mode != Objective::Mode::linear) {
    tol_eff = std::max(
        tol, 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ns)));
  }
  if (f.rel_residual(x) > tol_eff) {
    std::ostringstream msg;
    msg << "solve_phi: residual " << f.rel_residual(x) << " > tol " << tol_eff
        << " at n=" << n << ", s=" << s << ", phi=" << x;
    throw SolitonSolveError(msg.str());
  }
  return x;
}

PhiDerivs phi_derivs(int n, double s, double phi) {
  check_dim(n);
  if (!(phi > 0.0)) {
    throw std::domain_error("phi_derivs: phi must be positive, got " +
                            std::to_string(phi));
  }
  const double dphi = std::exp(n * s - phi - (n - 1) * std::log(phi));
  const double r = dphi / phi;
  const double d2 = dphi * (n - dphi - (n - 1) * r);
  const double d3 = d2 * (n - 2.0 * dphi - 2.0 * (n - 1) * r) + (n - 1) * r * r * dphi;
  return {dphi, d2, d3};
}

double ode_residual(int n, double s, double phi, double dphi) {
  if (!(phi > 0.0) || !(dphi > 0.0)) return std::numeric_limits<double>::infinity();
  // |phi^(n-1) phi' e^phi / e^(ns) - 1|
  return std::abs(std::expm1((n - 1) * std::log(phi) + std::log(dphi) + phi - n * s));
}

double implicit_residual(int n, double s, double phi) {
  return Objective::make(n, s).rel_residual(phi);
}

namespace {

SolitonProfile fill_profile(int n, std::vector<double> grid, double tol) {
  SolitonProfile p;
  p.n = n;
  p.tol = tol;
  p.grid = std::move(grid);
  const std::size_t m = p.grid.size();
  p.phi.resize(m);
  p.dphi.resize(m);
  p.d2phi.resize(m);
  p.d3phi.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = p.grid[i];
    double phi;
    try {
      phi = solve_phi(n, s, tol);
    } catch (const SolitonSolveError& e) {
      throw SolitonSolveError("build_profile at s=" + std::to_string(s) + ": " +
                              e.what());
    }
    const PhiDerivs d = phi_derivs(n, s, phi);
    p.phi[i] = phi;
    p.dphi[i] = d.dphi;
    p.d2phi[i] = d.d2phi;
    p.d3phi[i] = d.d3phi;
    p.max_ode_residual = std::max(p.max_ode_residual, ode_residual(n, s, phi, d.dphi));
    p.max_implicit_residual =
        std::max(p.max_implicit_residual, implicit_residual(n, s, phi));
    if (!(phi > 0.0) || !(d.dphi > 0.0)) {
      throw SolitonSolveError("build_profile: positivity lost at s=" +
                              std::to_string(s));
    }
    if (i > 0 && !(p.phi[i] >= p.phi[i - 1])) {
      throw SolitonSolveError("build_profile: phi not nondecreasing at s=" +
                              std::to_string(s));
    }
  }
  return p;
}

}  // namespace

SolitonProfile build_profile(int n, double s_min, double s_max, int points,
                             double tol) {
  check_dim(n);
  if (!(s_min < s_max)) throw std::invalid_argument("build_profile: s_min < s_max required");
  if (points < 2) throw std::invalid_argument("build_profile: points >= 2 required");
  std::vector<double> grid(points);
  const double h = (s_max - s_min) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = s_min + i * h;
  grid.back() = s_max;
  return fill_profile(n, std::move(grid), tol);
}

SolitonProfile build_profile_on_grid(int n, std::vector<double> grid, double tol) {
  check_dim(n);
  if (grid.size() < 2) throw std::invalid_argument("build_profile_on_grid: need >= 2 points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("build_profile_on_grid: grid must be strictly increasing");
    }
  }
  return fill_profile(n, std::move(grid), tol);
}

double asymptotic_lambda(int n, double s) {
  return std::log(std::pow(static_cast<double>(n), n) * std::pow(s, n - 1));
}

PhiAsymptotics asymptotic_phi(int n, double s, ExpansionOrder order) {
  check_dim(n);
  const double e = 2.718281828459045;
  if (!(s > e)) {
    throw std::domain_error("asymptotic_phi: expansion valid for s > e only");
  }
  const double L = asymptotic_lambda(n, s);
  const double ns = n * s;
  const double m = n - 1;  // every retained coefficient carries this factor

  if (order == ExpansionOrder::leading) {
    return {ns - L, n - m / s, m / (s * s), -2.0 * m / (s * s * s)};
  }

  const double ns2 = ns * ns, ns3 = ns2 * ns;
  const double s2 = s * s, s3 = s2 * s;
  const double phi = ns - L + m * L / ns + m / ns
      + 0.5 * m * L * L / ns2 - m * (n - 2) * L / ns2 - 0.5 * m * (3 * n - 5) / ns2
      + (1.0 / 3.0) * m * L * L * L / ns3 - 0.5 * m * (3 * n - 5) * L * L / ns3
      + m * (n * n - 6 * n + 7) * L / ns3
      + (1.0 / 6.0) * m * (11 * n * n - 46 * n + 47) / ns3;
  const double dphi = n - m / s - m * L / (n * s2) + m * (n - 2) / (n * s2)
      - m * L * L / (n * n * s3) + m * (3 * n - 5) * L / (n * n * s3)
      - m * (n * n - 6 * n + 7) / (n * n * s3);
  const double d2phi = m / s2 + 2.0 * m * L / (n * s3) - m * (3 * n - 5) / (n * s3);
  const double d3phi = -2.0 * m / s3;
  return {phi, dphi, d2phi, d3phi};
}

}  // namespace krs
