#include "families.hpp"
#include "skewdim/boettcher.hpp"
#include "skewdim/deformation.hpp"
#include "skewdim/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace skewdim;
using namespace skewdim::testing;

// Frozen from tests/oracles/deformation_oracle.py (mpmath, 50 digits).
constexpr double kV12 = -0.28222846986318473;
constexpr double kDwV12 = 0.17530727409030078;
constexpr double kDwV14 = 0.034193039158708416;
constexpr double kDphi12 = 0.14111423493159236;
const cplx kZB = std::polar(1.0, 0.7);
const cplx kWB = std::polar(1.5, 2.1);
const cplx kVB{-0.47175304841837068, -0.22649314935611150};
const cplx kDwVB{-0.044430693948430198, 0.026537600449503105};
constexpr double kDphiB = -0.085090168180830046;

TEST_CASE("v series examples") {
  const auto a = family_a();
  CHECK(std::abs(v_series(a, 1.0, 2.0).value - kV12) < 1e-15);
  CHECK(std::abs(v_series(a, 1.0, 2.0, {10}).value - kV12) < 1e-6);
  CHECK(std::abs(v_series(a, 1.0, 1.0).value - (-1.0)) < 1e-15);
  CHECK(std::abs(v_series(a, 1.0, cplx{0.0, 1.0}).value) < 1e-15);
  CHECK(std::abs(v_series(family_b(), kZB, kWB).value - kVB) < 1e-14);
}

TEST_CASE("v series tail bound covers the truncation error") {
  const auto b = family_b();
  for (int n : {2, 4, 8}) {
    const auto sv = v_series(b, kZB, 1.0001 * kWB / std::abs(kWB), {n});
    const auto full = v_series(b, kZB, 1.0001 * kWB / std::abs(kWB));
    CHECK(std::abs(sv.value - full.value) <= sv.tail_bound * 1.0001 + 1e-15);
  }
}

TEST_CASE("dw v series examples") {
  const auto a = family_a();
  CHECK(dw_v_series(a, 1.0, 2.0).real() == doctest::Approx(kDwV12).epsilon(1e-14));
  CHECK(dw_v_series(a, 1.0, 4.0).real() == doctest::Approx(kDwV14).epsilon(1e-14));
  CHECK(std::abs(dw_v_series(family_b(), kZB, kWB) - kDwVB) < 1e-15);
  CHECK_THROWS_AS(dw_v_series(a, 1.0, 1.0), Error);
  CHECK_THROWS_AS(dw_v_series(a, 1.0, 1.0 + 1e-7), Error);
  // Leading-order decay at |w| = 1e3.
  const auto d = family_d();
  const double bound = 0.5 * (1.0 * 1e-3 + 2.0 * 1e-6) * (1.0 + 1e-3);
  CHECK(std::abs(dw_v_series(d, std::polar(1.0, 0.2), std::polar(1e3, 0.9))) <= bound);
}

TEST_CASE("dw v matches a difference quotient of v") {
  const auto f = family_d();
  const double h = 1e-5;
  const cplx z = std::polar(1.0, 1.3);
  for (double r : {1.2, 1.7, 2.5}) {
    const cplx w = std::polar(r, 0.4);
    const cplx fd = (v_series(f, z, w + h).value - v_series(f, z, w - h).value) / (2.0 * h);
    CHECK(std::abs(fd - dw_v_series(f, z, w)) < 1e-8);
  }
}

TEST_CASE("dot phi0 examples") {
  const auto a = family_a();
  CHECK(dot_phi0(a, 1.0, 2.0) == doctest::Approx(kDphi12).epsilon(1e-14));
  CHECK(dot_phi0(a, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(dot_phi0(a, 1.0, cplx{0.0, 1.0})) < 1e-15);
  CHECK(dot_phi0(family_b(), kZB, kWB) == doctest::Approx(kDphiB).epsilon(1e-13));
}

TEST_CASE("dot phi0 matches a finite difference of the potential") {
  // phi_t(H_t(z, w)) differentiated at t = 0.
  const auto b = family_b();
  const double t = 1e-5;
  for (double r : {1.3, 2.0}) {
    const cplx w = std::polar(r, 0.8);
    const cplx z = std::polar(1.0, 2.2);
    const double plus = potential(b, t, {z, conjugacy_H(b, t, z, w)});
    const double minus = potential(b, -t, {z, conjugacy_H(b, -t, z, w)});
    CHECK(std::abs((plus - minus) / (2.0 * t) - dot_phi0(b, z, w)) < 1e-7);
  }
}

TEST_CASE("coboundary residual") {
  CHECK(coboundary_residual(family_a(), 1.0, 2.0) < 1e-7);
  CHECK(std::abs(kDphi12 - (kDwV12 - kDwV14)) < 1e-15);
  const CounterRng rng(5);
  for (const auto& f : {family_a(), family_b(), family_d(), family_c()}) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
      const cplx w = std::polar(1.1 + 0.9 * rng.uniform(i, 1), kTwoPi * rng.uniform(i, 2));
      CHECK(coboundary_residual(f, z, w) < 1e-7);
    }
  }
  CHECK(coboundary_residual(zero_family(), 1.0, 2.0) == 0.0);
}

TEST_CASE("functional equation of v") {
  const CounterRng rng(9);
  for (const auto& f : {family_a(), family_b(), family_c(), family_d()}) {
    const int d = f.d();
    for (std::uint64_t i = 0; i < 100; ++i) {
      const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
      const cplx w = std::polar(1.1 + 1.9 * rng.uniform(i, 1), kTwoPi * rng.uniform(i, 2));
      cplx rhs = static_cast<double>(d) * std::pow(w, d - 1) * v_series(f, z, w).value;
      for (int k = 1; k <= d; ++k) rhs += f.c(k)(z) * std::pow(w, d - k);
      const cplx lhs = v_series(f, std::pow(z, d), std::pow(w, d)).value;
      CHECK(std::abs(lhs - rhs) < 1e-9);
    }
  }
}

TEST_CASE("energy closed form") {
  const double l2 = std::log(2.0);
  CHECK(energy_closed_form(family_a(), false) == doctest::Approx(1.0 / l2).epsilon(1e-15));
  CHECK(energy_closed_form(family_d(), false) == doctest::Approx(5.0 / (4.0 * l2)).epsilon(1e-15));
  CHECK(energy_closed_form(family_d(), true) == doctest::Approx(9.0 / (4.0 * l2)).epsilon(1e-15));
  CHECK(energy_closed_form(family_d(), true) == doctest::Approx(3.2460638420001677).epsilon(1e-14));
  CHECK_THROWS_AS(energy_closed_form(family_a(3), false), Error);
}

TEST_CASE("energy quadrature") {
  EnergyConfig cfg;
  cfg.seed = 7;
  const auto ea = energy_quadrature(family_a(), cfg);
  CHECK(std::abs(ea.I_est / (1.0 / std::log(2.0)) - 1.0) < 0.10);
  CHECK(ea.levels.size() == 9);
  const auto eb = energy_quadrature(family_b(), cfg);
  CHECK(std::abs(eb.I_est / (0.25 / std::log(2.0)) - 1.0) < 0.10);
  const SkewFamily a2(2, 2, {CoeffPoly{}, CoeffPoly({2.0})});
  CHECK(energy_quadrature(a2, cfg).I_est == doctest::Approx(4.0 * ea.I_est).epsilon(1e-12));
  CHECK(energy_quadrature(zero_family(), cfg).I_est == 0.0);
  const auto again = energy_quadrature(family_b(), cfg);
  CHECK(again.I_est == eb.I_est);
}

TEST_CASE("variance estimator") {
  VarianceConfig cfg;
  cfg.seed = 3;
  cfg.samples = 20000;
  const auto va = variance_mc(family_a(), cfg);
  CHECK(std::abs(va.var_est / 0.5 - 1.0) < 0.10);
  const auto vb = variance_mc(family_b(), cfg);
  CHECK(std::abs(vb.var_est / 0.125 - 1.0) < 0.10);
  const auto vz = variance_mc(zero_family(), cfg);
  CHECK(vz.var_est == 0.0);
  CHECK(vz.std_error == 0.0);
  cfg.threads = 1;
  CHECK(variance_mc(family_b(), cfg).var_est == vb.var_est);
}

TEST_CASE("dot phi0 has mean zero") {
  const auto m = dot_phi0_mean(family_b(), 200000, 17);
  CHECK(std::abs(m.mean) < 3.0 * m.std_error);
  const auto ma = dot_phi0_mean(family_a(), 200000, 17);
  CHECK(std::abs(ma.mean) < 3.0 * ma.std_error);
}

TEST_CASE("base degree must match fiber degree") {
  CHECK_THROWS_AS(v_series(family_a(3), 1.0, 2.0), Error);
  EnergyConfig e;
  CHECK_THROWS_AS(energy_quadrature(family_a(3), e), Error);
}
