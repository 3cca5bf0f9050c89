// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "families.hpp"
#include "skewdim/boettcher.hpp"
#include "skewdim/cli.hpp"
#include "skewdim/deformation.hpp"
#include "skewdim/expansion.hpp"
#include "skewdim/pressure.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace skewdim;
using namespace skewdim::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PressureConfig with_method(PressureMethod m) {
  PressureConfig c;
  c.method = m;
  return c;
}

Outcome t0_exactness() {
  double worst = 0.0;
  for (auto m : {PressureMethod::kPeriodic, PressureMethod::kPreimage}) {
    worst = std::max(worst, std::abs(solve_delta(family_a(), 0.0, 10, 1e-10, with_method(m)).delta - 1.0));
    worst = std::max(worst, std::abs(solve_delta(family_c(), 0.0, 6, 1e-10, with_method(m)).delta - 1.0));
  }
  return {worst < 1e-9, fmt("max |delta - 1| = %.2e", worst)};
}

Outcome pressure_closed_form() {
  double worst = 0.0;
  for (double s : {0.5, 1.0, 1.5}) {
    const double p = pressure_estimate(family_a(), 0.0, s, 10).P;
    worst = std::max(worst, std::abs(p - 2.0 * (1.0 - s) * std::log(2.0)));
  }
  return {worst < 1e-6, fmt("max deviation %.2e", worst)};
}

Outcome functional_equation() {
  const CounterRng rng(101);
  double worst = 0.0;
  for (const auto& f : {family_a(), family_b(), family_c()}) {
    const int d = f.d();
    for (std::uint64_t i = 0; i < 100; ++i) {
      const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
      const cplx w = std::polar(1.1 + 1.9 * rng.uniform(i, 1), kTwoPi * rng.uniform(i, 2));
      cplx rhs = static_cast<double>(d) * std::pow(w, d - 1) * v_series(f, z, w, {60}).value;
      for (int k = 1; k <= d; ++k) rhs += f.c(k)(z) * std::pow(w, d - k);
      worst = std::max(worst, std::abs(v_series(f, std::pow(z, d), std::pow(w, d), {60}).value - rhs));
    }
  }
  return {worst < 1e-9, fmt("max residual %.2e", worst)};
}

Outcome coboundary() {
  const CounterRng rng(202);
  double worst = 0.0;
  for (const auto& f : {family_a(), family_b()}) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
      const cplx w = std::polar(1.1 + 0.9 * rng.uniform(i, 1), kTwoPi * rng.uniform(i, 2));
      worst = std::max(worst, coboundary_residual(f, z, w));
    }
  }
  return {worst < 1e-7, fmt("max residual %.2e", worst)};
}

Outcome conjugacy_derivative() {
  const auto a = family_a();
  const cplx v = v_series(a, 1.0, 2.0).value;
  double e[3];
  const double ts[3] = {1e-2, 5e-3, 2.5e-3};
  for (int i = 0; i < 3; ++i) e[i] = std::abs((conjugacy_H(a, ts[i], 1.0, 2.0) - 2.0) / ts[i] - v);
  const double r1 = e[1] / e[0];
  const double r2 = e[2] / e[1];
  const bool ok = r1 >= 0.3 && r1 <= 0.7 && r2 >= 0.3 && r2 <= 0.7;
  return {ok, fmt("errors %.3e %.3e %.3e, ratios %.4f %.4f", e[0], e[1], e[2], r1, r2)};
}

Outcome energy() {
  EnergyConfig cfg;
  cfg.seed = 20240601;
  const auto ea = energy_quadrature(family_a(), cfg);
  const auto eb = energy_quadrature(family_b(), cfg);
  const double ta = energy_closed_form(family_a(), false);
  const double tb = energy_closed_form(family_b(), false);
  const double ra = std::abs(ea.I_est - ta) / ta;
  const double rb = std::abs(eb.I_est - tb) / tb;
  return {ra < 0.10 && rb < 0.10,
          fmt("A %.5f (rel %.4f), B %.5f (rel %.4f)", ea.I_est, ra, eb.I_est, rb)};
}

Outcome variance() {
  VarianceConfig vc;
  vc.seed = 20240601;
  EnergyConfig ec;
  ec.seed = 20240601;
  const auto va = variance_mc(family_a(), vc);
  const auto vb = variance_mc(family_b(), vc);
  const double ra = std::abs(va.var_est - 0.5) / 0.5;
  const double rb = std::abs(vb.var_est - 0.125) / 0.125;
  const auto ea = energy_quadrature(family_a(), ec);
  const double gap = std::abs(va.var_est - 0.5 * std::log(2.0) * ea.I_est);
  const double se = std::hypot(va.std_error, 0.5 * std::log(2.0) * ea.std_error);
  return {ra < 0.10 && rb < 0.10 && gap < 3.0 * se,
          fmt("A %.5f (rel %.4f), B %.5f (rel %.4f), identity gap %.2e vs 3 se %.2e", va.var_est, ra,
              vb.var_est, rb, gap, 3.0 * se)};
}

Outcome headline() {
  ExpansionConfig cfg;
  cfg.sweep.n_max = 9;
  cfg.diagnostics = false;
  const auto r = verify_expansion(family_a(), cfg);
  const double target = 1.0 / (8.0 * std::log(2.0));
  const double rel = std::abs(r.fit.a_fit - target) / target;
  return {r.fit_ok && rel < 0.15, fmt("a_fit %.6f vs %.6f (rel %.4f), vd coefficient %.6f", r.fit.a_fit, target,
                                      rel, r.vd_coefficient_fit)};
}

Outcome phase() {
  const double a = solve_delta(family_a(), 0.08, 9).delta;
  const double b = solve_delta(family_a(), cplx{0.0, 0.08}, 9).delta;
  const double bound = 0.2 * 0.180337 * 0.08 * 0.08;
  return {std::abs(a - b) < bound, fmt("|delta(0.08) - delta(0.08i)| = %.3e, bound %.3e", std::abs(a - b), bound)};
}

Outcome methods() {
  const auto p = solve_delta(family_a(), 0.05, 9);
  const auto q = solve_delta(family_a(), 0.05, 9, 1e-10, with_method(PressureMethod::kPreimage));
  const double gap = std::abs(p.delta - q.delta);
  return {gap < 1e-4, fmt("periodic %.10f, preimage %.10f, gap %.2e", p.delta, q.delta, gap)};
}

Outcome base_degree() {
  ExpansionConfig cfg;
  cfg.t_grid = {0.03, 0.05, 0.07, 0.09};
  cfg.sweep.n_max = 7;
  cfg.diagnostics = false;
  const auto r = verify_expansion(family_a(3), cfg);
  const double target = 1.0 / (4.0 * std::log(6.0));
  const double rel = std::abs(r.fit.a_fit - target) / target;
  return {r.fit_ok && rel < 0.20, fmt("a_fit %.6f vs %.6f (rel %.4f)", r.fit.a_fit, target, rel)};
}

Outcome collision_probe() {
  std::ifstream in(SKEWDIM_CONFIG_DIR "/family_d.json");
  std::stringstream text;
  text << in.rdbuf();
  const RunConfig cfg = parse_config(text.str(), "energy");
  std::ostringstream out;
  std::ostringstream err;
  if (run(cfg, {}, out, err) != 0) return {false, "energy command failed: " + err.str()};
  const auto j = nlohmann::json::parse(out.str())["result"];
  const double est = j["estimate"].get<double>();
  const double se = j["stderr"].get<double>();
  const double c0 = j["theory"].get<double>();
  const double c1 = j["theory_with_cross"].get<double>();
  const bool excl0 = std::abs(est - c0) > 3.0 * se;
  const bool excl1 = std::abs(est - c1) > 3.0 * se;
  return {excl0 || excl1, fmt("I_est %.5f +- %.5f; candidates %.6f (%s), %.6f (%s)", est, se, c0,
                              excl0 ? "excluded" : "not excluded", c1, excl1 ? "excluded" : "not excluded")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no runtime requirement
    std::function<Outcome()> fn;
  };
  const Criterion all[] = {
      {1, "t=0 exactness", 30.0, t0_exactness},
      {2, "pressure closed form at t=0", 0.0, pressure_closed_form},
      {3, "series functional equation", 0.0, functional_equation},
      {4, "coboundary identity", 0.0, coboundary},
      {5, "conjugacy derivative", 0.0, conjugacy_derivative},
      {6, "energy quadrature", 120.0, energy},
      {7, "variance", 120.0, variance},
      {8, "headline coefficient", 900.0, headline},
      {9, "phase invariance", 0.0, phase},
      {10, "method cross-validation", 0.0, methods},
      {11, "base degree 3", 0.0, base_degree},
      {12, "collision probe", 0.0, collision_probe},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over %.0f s budget]", c.budget_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-30s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
