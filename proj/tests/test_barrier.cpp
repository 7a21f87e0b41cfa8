#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "krs/barrier.hpp"
#include "krs/numerics.hpp"
#include "krs/soliton.hpp"

using namespace krs;

TEST_CASE("cutoff_psi plateau values and midpoint symmetry") {
  CHECK(cutoff_psi(0.5).psi == 0.0);
  CHECK(cutoff_psi(0.5).dpsi == 0.0);
  CHECK(cutoff_psi(0.5).d3psi == 0.0);
  CHECK(cutoff_psi(3.0).psi == 1.0);
  CHECK(cutoff_psi(3.0).dpsi == 0.0);
  CHECK(cutoff_psi(1.5).psi == doctest::Approx(0.5).epsilon(1e-15));
  // symmetry psi(x) + psi(3 - x) = 1
  for (double x : {1.1, 1.3, 1.7, 1.9}) {
    CHECK(cutoff_psi(x).psi + cutoff_psi(3.0 - x).psi ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  // monotone
  double prev = -1.0;
  for (double x = 0.9; x <= 2.1; x += 0.01) {
    const CutoffJet c = cutoff_psi(x);
    CHECK(c.psi >= prev);
    CHECK(c.dpsi >= 0.0);
    prev = c.psi;
  }
}

TEST_CASE("cutoff_psi derivatives match finite differences") {
  const double h = 1e-5;
  for (double x : {1.05, 1.2, 1.5, 1.8, 1.95}) {
    const CutoffJet c = cutoff_psi(x);
    const double fd1 = (cutoff_psi(x + h).psi - cutoff_psi(x - h).psi) / (2 * h);
    const double fd2 =
        (cutoff_psi(x + h).psi - 2 * c.psi + cutoff_psi(x - h).psi) / (h * h);
    const double fd3 = (cutoff_psi(x + h).d2psi - cutoff_psi(x - h).d2psi) / (2 * h);
    CHECK(c.dpsi == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(c.d2psi == doctest::Approx(fd2).epsilon(1e-4));
    CHECK(c.d3psi == doctest::Approx(fd3).epsilon(1e-6));
  }
  // smooth vanishing at the junctions
  CHECK(cutoff_psi(1.0 + 1e-9).psi < 1e-200);
  CHECK(std::abs(cutoff_psi(2.0 - 1e-9).d3psi) < 1e-100);
}

TEST_CASE("barrier spec validation") {
  CHECK_THROWS_AS(build_barrier(build_profile(2, 0.1, 8.0, 100),
                                BarrierSpec{1.0, 0.5, 1.0, Side::upper, 3}),
                  std::invalid_argument);
  BarrierSpec bad{1.0, 1.5, 1.0, Side::upper, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {1.0, 0.5, 0.25, Side::upper, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {1.0, 0.5, 1.0, Side::upper, 1};  // n = 1 rejected
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("build_barrier: K=0 degenerates to the soliton") {
  const SolitonProfile base = build_profile(2, 0.1, 16.0, 400);
  const BarrierProfile bp = build_barrier(base, {0.0, 0.5, 1.0, Side::upper, 2});
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(bp.phib[i] == base.phi[i]);
    CHECK(bp.dphib[i] == base.dphi[i]);
    CHECK(bp.bhat[i] == 0.0);
  }
}

TEST_CASE("build_barrier: cutoff region and closed-form tail") {
  const double K = 1.0, alpha = 0.5, R = 2.0;
  const SolitonProfile base = build_profile(2, -4.0, 8.0 * R, 1601);
  const BarrierSpec spec{K, alpha, R, Side::upper, 2};
  const BarrierProfile bp = build_barrier(base, spec);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double s = base.grid[i];
    if (s <= R) {
      CHECK(bp.phib[i] == base.phi[i]);  // psi vanishes below R
    }
    if (s >= 2.0 * R) {
      // phi - phi_b = K alpha (2R)^alpha s^(-1-alpha) exactly (psi = 1)
      const double expected = K * alpha * std::pow(2 * R, alpha) * std::pow(s, -1 - alpha);
      CHECK(base.phi[i] - bp.phib[i] == doctest::Approx(expected).epsilon(1e-13));
    }
  }
  // bhat nonnegative and nonincreasing for the upper side
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(bp.bhat[i] >= 0.0);
    if (i > 0) CHECK(bp.bhat[i] <= bp.bhat[i - 1] + 1e-15);
  }
  // finite differences of bhat reproduce phi_b - phi to truncation accuracy:
  // central-difference error is h^2/6 * |g''| with g'' = d2phib - d2phi
  const double h = base.spacing();
  for (std::size_t i = 1; i + 1 < base.size(); ++i) {
    const double fd = (bp.bhat[i + 1] - bp.bhat[i - 1]) / (2 * h);
    const double expected = bp.phib[i] - base.phi[i];
    double g2 = 0.0;
    for (std::size_t j = i - 1; j <= i + 1; ++j) {
      g2 = std::max(g2, std::abs(bp.d2phib[j] - base.d2phi[j]));
    }
    CHECK(std::abs(fd - expected) <= 0.25 * h * h * g2 + 1e-12);
  }
  // and halving h shrinks the worst mismatch about 4x (second order)
  const SolitonProfile fine = build_profile(2, -4.0, 8.0 * R, 3201);
  const BarrierProfile bpf = build_barrier(fine, spec);
  const double hf = fine.spacing();
  double err_c = 0.0, err_f = 0.0;
  for (std::size_t i = 1; i + 1 < base.size(); ++i) {
    err_c = std::max(err_c, std::abs((bp.bhat[i + 1] - bp.bhat[i - 1]) / (2 * h) -
                                     (bp.phib[i] - base.phi[i])));
  }
  for (std::size_t i = 1; i + 1 < fine.size(); ++i) {
    err_f = std::max(err_f, std::abs((bpf.bhat[i + 1] - bpf.bhat[i - 1]) / (2 * hf) -
                                     (bpf.phib[i] - fine.phi[i])));
  }
  CHECK(err_c / err_f == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("barrier_perturbation closed forms and bounds") {
  const BarrierSpec spec{1.0, 0.5, 10.0, Side::upper, 2};
  const double K = spec.K, alpha = spec.alpha, R = spec.R;
  // s = 2R: pure tail, exactly K
  CHECK(barrier_perturbation(spec, 2 * R) == doctest::Approx(K).epsilon(1e-14));
  // s >= 2R: K (2R)^alpha s^(-alpha)
  for (double s : {2 * R, 3 * R, 10 * R}) {
    CHECK(barrier_perturbation(spec, s) ==
          doctest::Approx(K * std::pow(2 * R, alpha) * std::pow(s, -alpha))
              .epsilon(1e-13));
  }
  // s <= R: constant value inside [K, 2^alpha K]
  const double low = barrier_perturbation(spec, R / 2);
  CHECK(low >= K);
  CHECK(low <= std::pow(2.0, alpha) * K);
  CHECK(barrier_perturbation(spec, R / 4) == doctest::Approx(low).epsilon(1e-13));
  // independent quadrature oracle on [R/2, 2R] (trapezoid, fine grid)
  double acc = 0.0;
  const int cells = 200000;
  const double a = R / 2, b = 2 * R;
  auto f = [&](double s) {
    return K * alpha * std::pow(2 * R, alpha) * std::pow(s, -1 - alpha) *
           cutoff_psi(s / R).psi;
  };
  for (int i = 0; i < cells; ++i) {
    const double x0 = a + (b - a) * i / cells;
    const double x1 = a + (b - a) * (i + 1) / cells;
    acc += 0.5 * (f(x0) + f(x1)) * (x1 - x0);
  }
  CHECK(low == doctest::Approx(acc + K).epsilon(1e-9));
}

TEST_CASE("certify_barrier: soliton case passes, small R fails") {
  // K=0 on [0.1, 100]: the five conditions hold for the soliton itself
  const SolitonProfile base = build_profile_on_grid(2, certification_grid(0.5, 0.1, 100.0));
  const BarrierProfile soliton = build_barrier(base, {0.0, 0.5, 0.5, Side::upper, 2});
  const CertificationReport rep0 = certify_barrier(soliton);
  CHECK(rep0.certified);
  for (const auto& m : rep0.margins) CHECK(m.min > 0.0);

  // (n=2, K=1, alpha=1/2, R=1): fails, with the failure located in the
  // active band [R, 2R]
  const SolitonProfile b1 = build_profile_on_grid(2, certification_grid(1.0, 0.1, 8.0));
  const CertificationReport rep1 =
      certify_barrier(build_barrier(b1, {1.0, 0.5, 1.0, Side::upper, 2}));
  CHECK_FALSE(rep1.certified);
  bool found_negative = false;
  for (const auto& m : rep1.margins) {
    if (m.min <= 0.0) {
      found_negative = true;
      CHECK(m.s_at_min >= 1.0);
      CHECK(m.s_at_min <= 2.0);
    }
  }
  CHECK(found_negative);
}

TEST_CASE("find_admissible_R ladder") {
  // K=0: smallest allowed R
  const AdmissibleRResult r0 = find_admissible_R(2, 0.0, 0.5, Side::upper, 64.0);
  CHECK(r0.found);
  CHECK(r0.R == 0.5);

  // (2, 1, 1/2) upper: finite admissible R, certified, near the prototype value
  const AdmissibleRResult r1 = find_admissible_R(2, 1.0, 0.5, Side::upper, 1024.0);
  CHECK(r1.found);
  CHECK(r1.R <= 64.0);
  CHECK(r1.R >= 16.0);
  CHECK(r1.report.certified);
  for (const auto& m : r1.report.margins) CHECK(m.min > 0.0);

  // bisection refinement reached 1%: R sits within (ladder/2, ladder]
  CHECK(r1.R < 32.0 * 1.01);

  // trend: smaller K at fixed (n, alpha) admits an R no larger
  const AdmissibleRResult r2 = find_admissible_R(2, 0.1, 0.5, Side::upper, 1024.0);
  CHECK(r2.found);
  CHECK(r2.R <= r1.R);

  // exhausting R_max reports failure with margins
  const AdmissibleRResult r3 = find_admissible_R(2, 1.0, 0.5, Side::upper, 0.5);
  CHECK_FALSE(r3.found);
  CHECK_FALSE(r3.report.certified);
}

TEST_CASE("certification monotone in K at fixed (n, alpha, R)") {
  const AdmissibleRResult found = find_admissible_R(2, 1.0, 0.5, Side::upper, 1024.0);
  REQUIRE(found.found);
  const double R = found.R;
  const SolitonProfile base =
      build_profile_on_grid(2, certification_grid(R, 0.1, 8.0 * R));
  for (double K : {0.75, 0.5, 0.25, 0.05, 0.0}) {
    const CertificationReport rep =
        certify_barrier(build_barrier(base, {K, 0.5, R, Side::upper, 2}));
    CHECK(rep.certified);
  }
}

TEST_CASE("metric equivalence band of a certified barrier") {
  const AdmissibleRResult found = find_admissible_R(2, 1.0, 0.5, Side::upper, 1024.0);
  REQUIRE(found.found);
  const CertificationReport& rep = found.report;
  // upper barrier: phi_b <= phi pointwise, phi_b' may cross phi' where the
  // cutoff ramps; both ratios stay in a narrow band around 1
  CHECK(rep.eq_phi_min > 0.9);
  CHECK(rep.eq_phi_max <= 1.0 + 1e-12);
  CHECK(rep.eq_dphi_min > 0.9);
  CHECK(rep.eq_dphi_max < 1.1);
}

TEST_CASE("check_initial_decay") {
  const SolitonProfile base = build_profile(2, -5.0, 40.0, 901);
  std::vector<double> zero(base.size(), 0.0);
  CHECK(check_initial_decay(base.grid, zero, 0.3, 0.5));

  // u = K s^(-alpha/2) decays too slowly
  std::vector<double> slow(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double s = base.grid[i];
    slow[i] = s > 1.0 ? 0.3 * std::pow(s, -0.25) : 0.0;
  }
  CHECK_FALSE(check_initial_decay(base.grid, slow, 0.3, 0.5));

  // a barrier perturbation with amplitude just under K (2R)^(-alpha) passes
  // the decay check at amplitude K (its tail is K' (2R)^alpha s^-alpha)
  const double K = 0.3, alpha = 0.5, R = 4.0;
  const double Kp = 0.999 * K * std::pow(2 * R, -alpha);
  const BarrierProfile small =
      build_barrier(base, {Kp, alpha, R, Side::upper, 2});
  CHECK(check_initial_decay(base.grid, small.bhat, K, alpha));
}

TEST_CASE("sandwich: decaying data sits between the barriers") {
  const double K = 0.3, alpha = 0.5;
  const AdmissibleRResult up = find_admissible_R(2, K, alpha, Side::upper, 1024.0);
  const AdmissibleRResult low = find_admissible_R(2, K, alpha, Side::lower, 1024.0);
  REQUIRE(up.found);
  REQUIRE(low.found);
  const double s_max = std::max(60.0, 8.0 * std::max(up.R, low.R));
  const SolitonProfile base = build_profile(2, -5.0, s_max, 2001);
  const BarrierProfile bup = build_barrier(base, {K, alpha, up.R, Side::upper, 2});
  const BarrierProfile blow = build_barrier(base, {K, alpha, low.R, Side::lower, 2});

  // any u passing the decay check is enclosed pointwise
  std::vector<double> u(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double s = base.grid[i];
    const double bound = s > 0 ? K * std::min(1.0, std::pow(s, -alpha)) : K;
    u[i] = 0.999 * bound * std::cos(0.3 * s);  // oscillating but admissible
  }
  REQUIRE(check_initial_decay(base.grid, u, K, alpha));
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(bup.bhat[i] >= u[i]);
    CHECK(blow.bhat[i] <= u[i]);
  }
}
