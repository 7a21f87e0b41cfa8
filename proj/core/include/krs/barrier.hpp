#pragma once

/// Decaying radial barriers around the soliton profile and the grid
/// certification of the five positivity conditions that stand in for
/// positive holomorphic bisectional curvature of the barrier metric.
///
/// The barrier profile perturbs phi by a cut-off power tail,
///
///     phi_b(s) = phi(s) -/+ K alpha (2R)^alpha s^(-1-alpha) psi(s/R)
///
/// (upper barrier subtracts), which integrates to the potential-level
/// perturbation
///
///     bhat(s) = +/- integral_s^inf K alpha (2R)^alpha sigma^(-1-alpha)
///                                  psi(sigma/R) dsigma.
///
/// psi is a smooth monotone cutoff: 0 below 1, 1 above 2.

#include <array>
#include <string>
#include <vector>

#include "krs/soliton.hpp"

namespace krs {

enum class Side { upper, lower };

inline const char* side_name(Side s) { return s == Side::upper ? "upper" : "lower"; }

struct BarrierSpec {
  double K = 1.0;       // amplitude, > 0 (K = 0 degenerates to the soliton)
  double alpha = 0.5;   // decay exponent, in (0, 1)
  double R = 1.0;       // cutoff radius, >= 1/2
  Side side = Side::upper;
  int n = 2;            // complex dimension, >= 2

  void validate() const;
};

/// Smooth monotone cutoff built from g(t) = exp(-1/t):
///   psi(x) = g(x-1) / (g(x-1) + g(2-x)),
/// identically 0 for x <= 1 and 1 for x >= 2, with psi', psi'', psi'''
/// obtained by forward-mode differentiation of the closed form.
struct CutoffJet {
  double psi;
  double dpsi;
  double d2psi;
  double d3psi;
};

CutoffJet cutoff_psi(double x);

/// phi_b and derivatives sampled on the base grid, plus the potential-level
/// perturbation bhat.
struct BarrierProfile {
  BarrierSpec spec;
  const SolitonProfile* base = nullptr;  // not owned; must outlive the profile
  std::vector<double> phib;
  std::vector<double> dphib;
  std::vector<double> d2phib;
  std::vector<double> d3phib;
  std::vector<double> bhat;
};

BarrierProfile build_barrier(const SolitonProfile& base, const BarrierSpec& spec);

/// Magnitude of the bhat tail integral from s to infinity: adaptive Simpson
/// on [max(s,R), 2R] plus the exact closed-form tail K (2R)^alpha s*^(-alpha)
/// from s* = max(s, 2R). For s <= R the value is constant in s and lies in
/// [K, 2^alpha K].
double barrier_perturbation(const BarrierSpec& spec, double s, double quad_tol = 1e-12);

struct MarginRecord {
  std::string name;
  double min;
  double s_at_min;
};

struct CertificationReport {
  bool certified = false;
  std::array<MarginRecord, 5> margins;
  BarrierSpec spec;
  // metric-equivalence band: extremes of phib/phi and dphib/dphi over the grid
  double eq_phi_min = 1.0, eq_phi_max = 1.0;
  double eq_dphi_min = 1.0, eq_dphi_max = 1.0;
};

/// Evaluates phi_b, phi_b', phi_b - phi_b', phi_b'^2 - phi_b phi_b'',
/// phi_b''^2 - phi_b' phi_b''' at every grid point. Certified means every
/// margin is strictly positive; failure is a report outcome, not an error.
CertificationReport certify_barrier(const BarrierProfile& bp);

/// Piecewise-uniform certification grid: spacing <= 0.01 R in the active
/// band [R, 2R], <= 0.05 elsewhere, covering [s_min, s_max].
std::vector<double> certification_grid(double R, double s_min, double s_max);

struct AdmissibleRResult {
  bool found = false;
  double R = 0.0;
  CertificationReport report;   // certified report when found, last failure otherwise
  int certifications = 0;       // grid certifications performed
};

/// Smallest admissible R on the ladder {1/2, 1, 2, 4, ...} refined by
/// bisection to 1% on the final bracket. Each candidate is certified on a
/// fresh certification grid over [s_min, 8R] with a profile solved at
/// tolerance `tol` (the candidate grids extend to 8R by construction).
AdmissibleRResult find_admissible_R(int n, double K, double alpha, Side side,
                                    double R_max, double s_min = 0.1,
                                    double tol = 1e-12);

/// Convenience overload matching call sites that already hold a base
/// profile; uses its dimension and solver tolerance.
AdmissibleRResult find_admissible_R(const SolitonProfile& base, double K,
                                    double alpha, Side side, double R_max);

/// True iff |u| <= K min(1, s^(-alpha)) wherever s > 0 and |u| <= K elsewhere.
bool check_initial_decay(const std::vector<double>& grid,
                         const std::vector<double>& u, double K, double alpha);

}  // namespace krs
