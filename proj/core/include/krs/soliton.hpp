#pragma once

/// Rotationally symmetric gradient soliton profile on C^n.
///
/// The radial potential, written as a function of s = log|z|^2, has
/// derivative phi(s) characterized by
///
///     phi^(n-1) * phi' * e^phi = e^(n*s),        phi -> 0  (s -> -inf).
///
/// Integrating once gives the implicit equation
///
///     sum_{k=0}^{n-1} (-1)^(n-k-1) (n!/k!) phi^k e^phi
///         = e^(n*s) + (-1)^(n-1) n!,
///
/// whose left side has derivative n phi^(n-1) e^phi, so the root in phi is
/// unique and monotone in s. Higher derivatives follow from differentiating
/// the defining equation:
///
///     phi''  = phi' (n - phi' - (n-1) phi'/phi),
///     phi''' = phi'' (n - 2 phi' - 2(n-1) phi'/phi) + (n-1) (phi'/phi)^2 phi'.

#include <stdexcept>
#include <string>
#include <vector>

namespace krs {

/// Sampled profile phi and its first three derivatives on an s-grid.
/// Immutable after construction; safe to share across threads.
struct SolitonProfile {
  int n = 2;
  std::vector<double> grid;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::vector<double> d2phi;
  std::vector<double> d3phi;
  double tol = 1e-12;

  // filled by the builders
  double max_ode_residual = 0.0;       // pointwise ODE residual, relative
  double max_implicit_residual = 0.0;  // implicit-equation residual, relative

  std::size_t size() const { return grid.size(); }
  double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

/// Profiles shorter than this are valid but too coarse for the flow stencils.
inline constexpr std::size_t kMinFlowPoints = 8;

inline bool profile_flow_ready(const SolitonProfile& p) {
  return p.size() >= kMinFlowPoints;
}

struct SolitonSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Left side of the implicit equation, e^phi factored out and the
/// polynomial part evaluated by Horner. Throws std::range_error once
/// e^phi is not representable.
double implicit_lhs(int n, double phi);

/// Root of the implicit equation at parameter s: bracketed bisection
/// refined by safeguarded Newton. Relative residual <= tol on success.
/// Evaluates in log space once n*s exceeds the representable-exponent
/// threshold, and returns the small-s limit e^s once phi < 1e-12.
double solve_phi(int n, double s, double tol = 1e-12);

struct PhiDerivs {
  double dphi;
  double d2phi;
  double d3phi;
};

/// First three derivatives from the exact recursions; phi must be positive.
PhiDerivs phi_derivs(int n, double s, double phi);

/// Relative residual of phi^(n-1) phi' e^phi = e^(ns), computed in log space
/// so it stays meaningful when e^(ns) is not representable.
double ode_residual(int n, double s, double phi, double dphi);

/// Relative residual of the implicit equation for a solved phi.
double implicit_residual(int n, double s, double phi);

/// Uniform grid in s. Throws SolitonSolveError with the offending s on
/// solver failure; throws std::invalid_argument on a bad grid request.
SolitonProfile build_profile(int n, double s_min, double s_max, int points,
                             double tol = 1e-12);

/// Same contract on a caller-supplied strictly increasing grid.
SolitonProfile build_profile_on_grid(int n, std::vector<double> grid,
                                     double tol = 1e-12);

enum class ExpansionOrder { leading, full };

struct PhiAsymptotics {
  double phi;
  double dphi;
  double d2phi;
  double d3phi;
};

/// Large-s expansions with Lambda(s) = log(n^n s^(n-1)):
///   leading: phi ~ ns - Lambda,       phi'  ~ n - (n-1)/s,
///            phi'' ~ (n-1)/s^2,       phi''' ~ -2(n-1)/s^3.
///   full:    all retained terms through o(1/s^3); every coefficient
///            carries a factor (n-1), so the n=1 series collapses to
///            phi = s exactly.
/// Requires s > e.
PhiAsymptotics asymptotic_phi(int n, double s, ExpansionOrder order);

/// Lambda(s) from the expansion normalization.
double asymptotic_lambda(int n, double s);

}  // namespace krs
