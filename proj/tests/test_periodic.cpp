#include "families.hpp"
#include "skewdim/error.hpp"
#include "skewdim/periodic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace skewdim;
using namespace skewdim::testing;

namespace {

// Frozen from tests/oracles/boettcher_oracle.py.
constexpr double kRepelling = 0.94721359549995794;
constexpr double kMultiplier = 1.8944271909999159;
constexpr double kSqrt095 = 0.97467943448089639;

TorusPoint iterate(const SkewFamily& f, cplx t, TorusPoint p, int n) {
  for (int i = 0; i < n; ++i) p = eval_map(f, t, p);
  return p;
}

}  // namespace

TEST_CASE("lattice at t = 0") {
  const auto a = family_a();
  auto pts = enumerate_t0(a, 1);
  REQUIRE(pts.size() == 1);
  CHECK(std::abs(pts[0].z - 1.0) < 1e-15);
  CHECK(std::abs(pts[0].w - 1.0) < 1e-15);
  pts = enumerate_t0(a, 3);
  CHECK(pts.size() == 49);
  for (const auto& p : pts) {
    CHECK(std::abs(std::pow(p.z, 7) - 1.0) < 1e-12);
    CHECK(std::abs(std::pow(p.w, 7) - 1.0) < 1e-12);
  }
  const SkewFamily f(3, 2, {CoeffPoly{}, CoeffPoly{}, CoeffPoly({1.0})});
  CHECK(enumerate_t0(f, 2).size() == 24);
  CHECK(lattice_size(f, 2) == 24);
  CHECK_THROWS_AS(enumerate_t0(a, 14, 1000), Error);
}

TEST_CASE("continuation examples") {
  const auto a = family_a();
  const auto p0 = enumerate_t0(a, 1)[0];
  const auto p = continue_in_t(a, p0, 0.05);
  CHECK(p.converged);
  CHECK(std::abs(p.w - kRepelling) < 1e-12);
  CHECK(std::abs(std::abs(p.multiplier) - kMultiplier) < 1e-12);

  const auto same = continue_in_t(family_d(), p0, 0.0);
  CHECK(same.w == p0.w);
  CHECK(same.z == p0.z);

  try {
    (void)continue_in_t(a, p0, 0.3);
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonHyperbolicContinuation);
  }
}

TEST_CASE("continued lattice keeps count, distinctness and periodicity") {
  const auto a = family_a();
  for (cplx t : {cplx{0.15, 0.0}, cplx{0.0, 0.1}, cplx{-0.1, 0.0}}) {
    const int n = 5;
    const auto pts = continue_lattice(a, n, t);
    REQUIRE(pts.size() == lattice_size(a, n));
    double min_dist = 1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(pts[i].converged);
      CHECK(std::abs(pts[i].multiplier) > 1.01);
      const auto back = iterate(a, t, {pts[i].z, pts[i].w}, n);
      CHECK(std::abs(back.w - pts[i].w) < 1e-8);
      CHECK(std::abs(back.z - pts[i].z) < 1e-8);
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        min_dist = std::min(min_dist, std::abs(pts[i].z - pts[j].z) + std::abs(pts[i].w - pts[j].w));
      }
    }
    CHECK(min_dist > 1e-8);
  }
}

TEST_CASE("continuation with d' = 3 and d = 3") {
  for (const auto& f : {family_a(3), family_c()}) {
    const auto pts = continue_lattice(f, 3, 0.05);
    CHECK(pts.size() == lattice_size(f, 3));
    for (const auto& p : pts) {
      CHECK(std::abs(iterate(f, 0.05, {p.z, p.w}, 3).w - p.w) < 1e-8);
    }
  }
}

TEST_CASE("continuation is thread-count independent") {
  ContinuationConfig one;
  one.threads = 1;
  ContinuationConfig many;
  many.threads = 4;
  const auto a = continue_lattice(family_b(), 6, cplx{0.05, 0.03}, one);
  const auto b = continue_lattice(family_b(), 6, cplx{0.05, 0.03}, many);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].w == b[i].w);
}

TEST_CASE("preimages") {
  auto pre = preimages(family_a(), 0.0, {1.0, 1.0});
  REQUIRE(pre.size() == 4);
  for (const auto& p : pre) {
    CHECK(std::abs(std::abs(p.z.real()) - 1.0) < 1e-15);
    CHECK(std::abs(std::abs(p.w.real()) - 1.0) < 1e-15);
  }
  pre = preimages(family_a(), 0.05, {1.0, 1.0});
  REQUIRE(pre.size() == 4);
  for (const auto& p : pre) {
    CHECK(std::abs(std::abs(p.w) - kSqrt095) < 1e-14);
    CHECK(std::abs(p.w.imag()) < 1e-15);
  }
  for (const auto& f : {family_b(), family_c(), family_d(), family_a(3)}) {
    const TorusPoint q{std::polar(1.0, 0.4), std::polar(1.1, -2.0)};
    const auto ps = preimages(f, cplx{0.07, -0.02}, q);
    CHECK(ps.size() == static_cast<std::size_t>(f.d() * f.d_prime()));
    for (const auto& p : ps) {
      const auto img = eval_map(f, cplx{0.07, -0.02}, p);
      CHECK(std::abs(img.z - q.z) < 1e-9);
      CHECK(std::abs(img.w - q.w) < 1e-9);
    }
  }
}

TEST_CASE("polynomial roots") {
  auto r = poly_roots({0.05, -1.0, 1.0});
  REQUIRE(r.size() == 2);
  CHECK(std::abs(r[0] - kRepelling) < 1e-14);
  CHECK(std::abs(r[1] - (1.0 - kRepelling)) < 1e-14);
  r = poly_roots({-1.0, 0.0, 0.0, 1.0});
  REQUIRE(r.size() == 3);
  for (const auto& x : r) CHECK(std::abs(x * x * x - 1.0) < 1e-12);
  r = poly_roots({1.0, 0.0, 1.0});
  REQUIRE(r.size() == 2);
  CHECK(std::abs(std::abs(r[0].imag()) - 1.0) < 1e-15);
  CHECK(std::abs(r[0] + r[1]) < 1e-15);
  // Double root is returned twice.
  r = poly_roots({1.0, -2.0, 1.0});
  CHECK(r.size() == 2);
  // Degree 7 with complex coefficients.
  std::vector<cplx> c{cplx{0.3, 1.0}, -2.0, 0.0, cplx{0.0, 0.5}, 1.0, 0.0, -0.1, 1.0};
  r = poly_roots(c);
  CHECK(r.size() == 7);
  for (const auto& x : r) {
    cplx v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    CHECK(std::abs(v) < 1e-9 * 3.0);
  }
  CHECK_THROWS_AS(poly_roots({1.0, 0.0}), Error);
}
