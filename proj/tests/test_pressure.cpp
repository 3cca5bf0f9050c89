#include "families.hpp"
#include "skewdim/error.hpp"
#include "skewdim/pressure.hpp"

#include <doctest.h>

#include <cmath>

using namespace skewdim;
using namespace skewdim::testing;

namespace {

PressureConfig preimage_cfg() {
  PressureConfig c;
  c.method = PressureMethod::kPreimage;
  return c;
}

// Frozen from tests/oracles/family_a_fiber_oracle.py.
constexpr double kDeltaA005 = 1.0004903714;
constexpr double kDeltaA01 = 1.0021843858;
constexpr double kDeltaAm008 = 1.0010417568;
constexpr double kDeltaAi008 = 1.0011532550;

}  // namespace

TEST_CASE("spectrum log-sum-exp matches direct summation") {
  BirkhoffSpectrum sp;
  std::vector<double> xs;
  const CounterRng rng(2);
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const double x = -40.0 + 12.0 * rng.uniform(i, 0);
    xs.push_back(x);
    sp.add(x);
  }
  for (double s : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    double m = -1e300;
    for (double x : xs) m = std::max(m, s * x);
    double acc = 0.0;
    for (double x : xs) acc += std::exp(s * x - m);
    CHECK(sp.log_sum_exp(s) == doctest::Approx(m + std::log(acc)).epsilon(1e-13));
  }
  BirkhoffSpectrum a;
  BirkhoffSpectrum b;
  for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 ? a : b).add(xs[i]);
  a.merge(b);
  CHECK(a.count() == sp.count());
  CHECK(a.log_sum_exp(1.3) == doctest::Approx(sp.log_sum_exp(1.3)).epsilon(1e-14));
  CHECK(sp.log_sum_exp(-1e-300) == doctest::Approx(std::log(5000.0)));
}

TEST_CASE("log partition at t = 0") {
  const auto a = family_a();
  CHECK(log_partition(a, 0.0, 1.0, 3) ==
        doctest::Approx(2.0 * std::log(7.0) - 6.0 * std::log(2.0)).epsilon(1e-13));
  CHECK(std::abs(log_partition(a, 0.0, 1.0, 3, preimage_cfg())) < 1e-13);
  CHECK(log_partition(family_c(), 0.0, 0.0, 3) == doctest::Approx(std::log(26.0 * 26.0)).epsilon(1e-14));
  CHECK(log_partition(family_a(3), 0.0, 0.0, 3) == doctest::Approx(std::log(26.0 * 7.0)).epsilon(1e-14));
  // No overflow for large s.
  CHECK(std::isfinite(log_partition(a, 0.1, 4.0, 8)));
}

TEST_CASE("pressure at t = 0 is (1 - s) log 4") {
  const auto a = family_a();
  for (auto cfg : {PressureConfig{}, preimage_cfg()}) {
    for (double s : {0.5, 1.0, 1.5}) {
      const auto est = pressure_estimate(a, 0.0, s, 10, cfg);
      CHECK(std::abs(est.P - 2.0 * std::log(2.0) * (1.0 - s)) < 1e-6);
    }
  }
  CHECK_THROWS_AS(pressure_estimate(a, 0.0, 1.0, 2), Error);
}

TEST_CASE("delta at t = 0") {
  for (const auto& f : {family_a(), family_b(), family_d()}) {
    for (auto cfg : {PressureConfig{}, preimage_cfg()}) {
      const auto r = solve_delta(f, 0.0, 8, 1e-10, cfg);
      CHECK(std::abs(r.delta - 1.0) < 1e-9);
      CHECK(r.vd == doctest::Approx(r.delta / 2.0));
    }
  }
  CHECK(std::abs(solve_delta(family_c(), 0.0, 5).delta - 1.0) < 1e-9);
}

TEST_CASE("delta for Family A against the fiber oracle") {
  const auto a = family_a();
  const auto r = solve_delta(a, 0.1, 9);
  CHECK(std::abs(r.delta - kDeltaA01) < 2e-4);
  CHECK(std::abs(r.delta - (1.0 + 0.01 / (8.0 * std::log(2.0)))) < 5e-4);
  const auto p = solve_delta(a, 0.05, 8);
  const auto q = solve_delta(a, 0.05, 8, 1e-10, preimage_cfg());
  CHECK(std::abs(p.delta - q.delta) < 1e-4);
  CHECK(std::abs(p.delta - kDeltaA005) < 1e-4);
  CHECK(q.basepoints > 1);
}

TEST_CASE("pressure is decreasing and convex in s") {
  for (cplx t : {cplx{0.05, 0.0}, cplx{0.0, 0.08}}) {
    const PartitionLevels lv(family_b(), t, 6, 8, PressureConfig{});
    double prev = 1e300;
    std::vector<double> ps;
    for (int i = 0; i <= 8; ++i) {
      const double p = lv.pressure(8, 0.25 * i);
      CHECK(p < prev);
      prev = p;
      ps.push_back(p);
    }
    for (std::size_t i = 1; i + 1 < ps.size(); ++i) CHECK(ps[i - 1] - 2.0 * ps[i] + ps[i + 1] >= -1e-8);
  }
}

TEST_CASE("phase invariance to second order") {
  const auto a = family_a();
  const double t = 0.05;
  const double bound = 0.2 * delta_coefficient_theory(a) * t * t;
  const double base = solve_delta(a, t, 8).delta;
  for (cplx ph : {cplx{0.0, 1.0}, cplx{-1.0, 0.0}}) {
    CHECK(std::abs(solve_delta(a, t * ph, 8).delta - base) < bound);
  }
}

TEST_CASE("odd cubic term at t = -0.08 matches the oracle") {
  // The true gap delta(0.08) - delta(-0.08) is 2.9e-4, above the 0.2 a t^2 band.
  const double d = solve_delta(family_a(), -0.08, 8).delta;
  CHECK(std::abs(d - kDeltaAm008) < 1e-4);
  CHECK(std::abs(solve_delta(family_a(), cplx{0.0, 0.08}, 8).delta - kDeltaAi008) < 1e-4);
}

TEST_CASE("no bracket outside the regime") {
  PressureConfig cfg;
  cfg.continuation.steps = 40;
  try {
    (void)solve_delta(family_a(), 0.2, 4, 1e-10, cfg);
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::kNoBracket || e.code() == ErrorCode::kNonHyperbolicContinuation));
  }
  CHECK_THROWS_AS(solve_delta(family_a(), 0.3, 4), Error);
}

TEST_CASE("method names") {
  CHECK(parse_method("periodic") == PressureMethod::kPeriodic);
  CHECK(parse_method("preimage") == PressureMethod::kPreimage);
  CHECK(method_name(PressureMethod::kPreimage) == "preimage");
  CHECK_THROWS_AS(parse_method("fourier"), Error);
}
