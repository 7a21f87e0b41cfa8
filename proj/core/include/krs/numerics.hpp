#pragma once

/// Small shared numerics: third-order Taylor jets, the interpolated-inverse
/// coefficient, Thomas elimination for tridiagonal systems, and Simpson
/// quadrature (fixed grid and adaptive).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace krs {

/// Value plus first three derivatives with respect to one scalar variable.
/// Enough forward-mode AD for the cutoff function and its third derivative.
struct Jet3 {
  double f = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;

  static Jet3 constant(double c) { return {c, 0.0, 0.0, 0.0}; }
  static Jet3 variable(double x) { return {x, 1.0, 0.0, 0.0}; }
};

inline Jet3 operator+(const Jet3& a, const Jet3& b) {
  return {a.f + b.f, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
}

inline Jet3 operator-(const Jet3& a, const Jet3& b) {
  return {a.f - b.f, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}

inline Jet3 operator*(const Jet3& a, const Jet3& b) {
  // Leibniz up to third order
  return {a.f * b.f,
          a.d1 * b.f + a.f * b.d1,
          a.d2 * b.f + 2.0 * a.d1 * b.d1 + a.f * b.d2,
          a.d3 * b.f + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.f * b.d3};
}

inline Jet3 operator/(const Jet3& a, const Jet3& b) {
  // Solve (q*b)^(k) = a^(k) for q's derivatives.
  const double q0 = a.f / b.f;
  const double q1 = (a.d1 - q0 * b.d1) / b.f;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q0 * b.d2) / b.f;
  const double q3 = (a.d3 - 3.0 * q2 * b.d1 - 3.0 * q1 * b.d2 - q0 * b.d3) / b.f;
  return {q0, q1, q2, q3};
}

inline Jet3 exp(const Jet3& a) {
  const double e = std::exp(a.f);
  return {e,
          e * a.d1,
          e * (a.d1 * a.d1 + a.d2),
          e * (a.d1 * a.d1 * a.d1 + 3.0 * a.d1 * a.d2 + a.d3)};
}

/// Averaged inverse over the interpolation parameter,
///   A(x, y) = integral_0^1 dtau / (x + tau*y) = log1p(y/x) / y,
/// with a two-term Taylor fallback when |y| is negligible against x.
/// Requires x > 0 and x + y > 0.
inline double averaged_inverse(double x, double y) {
  if (std::abs(y) < 1e-8 * x) {
    return (1.0 / x) * (1.0 - y / (2.0 * x));
  }
  return std::log1p(y / x) / y;
}

/// Thomas elimination for a tridiagonal system. `lower[0]` and
/// `upper[n-1]` are ignored. `scratch` needs size n. Overwrites `x`.
/// The flow matrices are strictly diagonally dominant, so no pivoting.
inline void solve_tridiagonal(std::span<const double> lower,
                              std::span<const double> diag,
                              std::span<const double> upper,
                              std::span<const double> rhs,
                              std::span<double> x,
                              std::span<double> scratch) {
  const std::size_t n = diag.size();
  scratch[0] = upper[0] / diag[0];
  x[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - lower[i] * scratch[i - 1];
    scratch[i] = upper[i] / m;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] -= scratch[i] * x[i + 1];
  }
}

/// Composite Simpson over uniformly spaced samples; an odd interval count
/// leaves one trapezoid cell at the right end.
inline double composite_simpson(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  std::size_t i = 0;
  while (i + 2 < n) {
    total += (h / 3.0) * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
    i += 2;
  }
  if (i + 1 < n) {
    total += (h / 2.0) * (values[i] + values[i + 1]);
  }
  return total;
}

/// Adaptive Simpson with the standard 15-point error estimate.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40) {
  struct Impl {
    const F& f;
    int max_depth;
    double recurse(double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) const {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth >= max_depth || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
      }
      return recurse(a, lm, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
             recurse(m, rm, b, fm, frm, fb, right, tol / 2.0, depth + 1);
    }
  };
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Impl{f, max_depth}.recurse(a, m, b, fa, fm, fb, whole, tol, 0);
}

}  // namespace krs
