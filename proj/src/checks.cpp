#include "skewdim/checks.hpp"

#include "skewdim/boettcher.hpp"
#include "skewdim/deformation.hpp"
#include "skewdim/error.hpp"
#include "skewdim/expansion.hpp"
#include "skewdim/periodic.hpp"
#include "skewdim/pressure.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace skewdim {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

class Suite {
 public:
  explicit Suite(std::vector<CheckResult>& out) : out_(out) {}

  // fn returns (passed, detail); thrown errors count as failures.
  void run(const std::string& module, const std::string& name,
           const std::function<std::pair<bool, std::string>()>& fn) {
    const auto tic = std::chrono::steady_clock::now();
    CheckResult r;
    r.module = module;
    r.name = name;
    try {
      auto [ok, detail] = fn();
      r.passed = ok;
      r.detail = detail;
    } catch (const Error& e) {
      r.passed = false;
      r.detail = std::string(code_name(e.code())) + ": " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    out_.push_back(std::move(r));
  }

 private:
  std::vector<CheckResult>& out_;
};

// Uniform point with |w| in [r0, r1] and z on the unit circle.
TorusPoint annulus_point(const CounterRng& rng, std::uint64_t i, double r0, double r1) {
  const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
  const double r = r0 + (r1 - r0) * rng.uniform(i, 1);
  return {z, std::polar(r, kTwoPi * rng.uniform(i, 2))};
}

int largest_period(const SkewFamily& fam, std::uint64_t limit, int floor_n) {
  int n = floor_n;
  while (lattice_size(fam, n + 1) <= limit) ++n;
  return n;
}

}  // namespace

cplx check_parameter(const SkewFamily& fam) {
  return 0.05 / std::max(1.0, fam.coefficient_bound());
}

std::vector<CheckResult> run_invariant_suite(const SkewFamily& fam, const CheckSuiteConfig& cfg) {
  std::vector<CheckResult> out;
  Suite suite(out);
  const cplx t = check_parameter(fam);
  const int d = fam.d();
  const int dp = fam.d_prime();
  const double log_jac = std::log(static_cast<double>(d)) + std::log(static_cast<double>(dp));
  const CounterRng rng(cfg.seed);
  const bool same_degree = d == dp;

  // family
  suite.run("family", "scaling multiplies theory by |lambda|^2", [&] {
    const cplx lambda = std::polar(1.7, 0.3);
    const auto q0 = theoretical_quantities(fam);
    const auto q1 = theoretical_quantities(fam.scaled(lambda));
    const double f = std::norm(lambda);
    double worst = 0.0;
    for (auto [a, b] : {std::pair{q0.S, q1.S}, {q0.I_theory, q1.I_theory}, {q0.var_theory, q1.var_theory},
                        {q0.ddot_delta, q1.ddot_delta}, {q0.vd_coefficient, q1.vd_coefficient}}) {
      worst = std::max(worst, std::abs(b - f * a) / std::max(1e-300, std::abs(f * a)) * (a != 0.0));
    }
    return std::pair{worst < 1e-12, "max relative deviation " + fmt(worst)};
  });
  suite.run("family", "potential at t=0 is -(log d + log d')", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p{std::polar(1.0, kTwoPi * rng.uniform(i, 0)), std::polar(1.0, kTwoPi * rng.uniform(i, 1))};
      worst = std::max(worst, std::abs(potential(fam, 0.0, p) + log_jac));
    }
    return std::pair{worst < 1e-12, "max deviation " + fmt(worst)};
  });
  suite.run("family", "eval_map at t=0 is (z^d', w^d)", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i, 0.5, 2.0);
      const TorusPoint q = eval_map(fam, 0.0, p);
      worst = std::max({worst, std::abs(q.z - std::pow(p.z, dp)),
                        std::abs(q.w - std::pow(p.w, d)) / std::abs(std::pow(p.w, d))});
    }
    return std::pair{worst < 1e-12, "max deviation " + fmt(worst)};
  });
  suite.run("family", "vertical derivative matches a centered difference", [&] {
    double worst = 0.0;
    const double h = 1e-5;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i + 1000, 0.5, 2.0);
      const cplx exact = vertical_derivative(fam, t, p);
      const cplx fd = (eval_map(fam, t, {p.z, p.w + h}).w - eval_map(fam, t, {p.z, p.w - h}).w) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    return std::pair{worst < 1e-6, "max relative error " + fmt(worst)};
  });

  // boettcher
  suite.run("boettcher", "G(F(p)) = d G(p)", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i + 2000, 1.2, 3.0);
      worst = std::max(worst, std::abs(green(fam, t, eval_map(fam, t, p)) - d * green(fam, t, p)));
    }
    return std::pair{worst < 1e-9, "max deviation " + fmt(worst)};
  });
  suite.run("boettcher", "phi(F(p)) = phi(p)^d", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i + 3000, 1.2, 3.0);
      const cplx lhs = boettcher_coord(fam, t, eval_map(fam, t, p));
      const cplx rhs = std::pow(boettcher_coord(fam, t, p), d);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return std::pair{worst < 1e-8, "max relative deviation " + fmt(worst)};
  });
  suite.run("boettcher", "|phi| = exp(G)", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i + 4000, 1.2, 3.0);
      worst = std::max(worst, std::abs(std::abs(boettcher_coord(fam, t, p)) - std::exp(green(fam, t, p))));
    }
    return std::pair{worst < 1e-9, "max deviation " + fmt(worst)};
  });
  suite.run("boettcher", "phi(H(omega)) = omega on 1.1 <= |omega| <= 10", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i + 5000, 1.1, 10.0);
      const cplx w = conjugacy_H(fam, t, p.z, p.w);
      worst = std::max(worst, std::abs(boettcher_coord(fam, t, {p.z, w}) - p.w));
    }
    return std::pair{worst < 1e-8, "max deviation " + fmt(worst)};
  });

  // deformation
  if (same_degree) {
    suite.run("deformation", "functional equation of v", [&] {
      double worst = 0.0;
      for (std::uint64_t i = 0; i < 100; ++i) {
        const TorusPoint p = annulus_point(rng, i + 6000, 1.1, 3.0);
        const cplx lhs = v_series(fam, std::pow(p.z, d), std::pow(p.w, d)).value;
        cplx rhs = static_cast<double>(d) * std::pow(p.w, d - 1) * v_series(fam, p.z, p.w).value;
        for (int k = 1; k <= d; ++k) rhs += fam.c(k)(p.z) * std::pow(p.w, d - k);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      return std::pair{worst < 1e-9, "max residual " + fmt(worst)};
    });
    suite.run("deformation", "dot_phi0 has mean zero", [&] {
      const SampleMean m = dot_phi0_mean(fam, 1000000, cfg.seed, cfg.threads);
      return std::pair{std::abs(m.mean) <= 3.0 * m.std_error,
                       "mean " + fmt(m.mean) + ", stderr " + fmt(m.std_error)};
    });
    suite.run("deformation", "coboundary identity g - g o F0", [&] {
      double worst = 0.0;
      for (std::uint64_t i = 0; i < 100; ++i) {
        const TorusPoint p = annulus_point(rng, i + 7000, 1.1, 2.0);
        worst = std::max(worst, coboundary_residual(fam, p.z, p.w));
      }
      return std::pair{worst < 1e-7, "max residual " + fmt(worst)};
    });

    EnergyConfig ecfg;
    ecfg.seed = cfg.seed;
    ecfg.threads = cfg.threads;
    VarianceConfig vcfg;
    vcfg.seed = cfg.seed;
    vcfg.threads = cfg.threads;
    std::optional<EnergyEstimate> energy;
    std::optional<VarianceEstimate> variance;
    const bool no_collision = fam.c(1).is_zero() || fam.c(d).is_zero();
    suite.run("deformation", "energy quadrature matches the closed form", [&] {
      energy = energy_quadrature(fam, ecfg);
      const double closed = energy_closed_form(fam, false);
      if (!no_collision) {
        return std::pair{true, "not applicable: c_1 and c_d both nonzero (estimate " + fmt(energy->I_est) + ")"};
      }
      const double rel = closed > 0.0 ? std::abs(energy->I_est - closed) / closed : std::abs(energy->I_est);
      return std::pair{closed > 0.0 ? rel < 0.1 : rel < 1e-12,
                       "estimate " + fmt(energy->I_est) + ", closed form " + fmt(closed)};
    });
    suite.run("deformation", "variance equals (log d / 2) times energy", [&] {
      if (!energy) energy = energy_quadrature(fam, ecfg);
      variance = variance_mc(fam, vcfg);
      const double half_log = 0.5 * std::log(static_cast<double>(d));
      const double gap = std::abs(variance->var_est - half_log * energy->I_est);
      const double se = std::hypot(variance->std_error, half_log * energy->std_error);
      return std::pair{gap <= 3.0 * se + 1e-12,
                       "variance " + fmt(variance->var_est) + ", gap " + fmt(gap) + ", 3 sigma " + fmt(3.0 * se)};
    });
    suite.run("deformation", "energy and variance scale by |lambda|^2", [&] {
      if (!energy) energy = energy_quadrature(fam, ecfg);
      if (!variance) variance = variance_mc(fam, vcfg);
      const SkewFamily scaled = fam.scaled(2.0);
      const auto e2 = energy_quadrature(scaled, ecfg);
      const auto v2 = variance_mc(scaled, vcfg);
      const double ge = std::abs(e2.I_est - 4.0 * energy->I_est);
      const double gv = std::abs(v2.var_est - 4.0 * variance->var_est);
      const bool ok = ge <= 3.0 * (e2.std_error + 4.0 * energy->std_error) + 1e-9 * (1.0 + e2.I_est) &&
                      gv <= 3.0 * (v2.std_error + 4.0 * variance->std_error) + 1e-9 * (1.0 + v2.var_est);
      return std::pair{ok, "energy gap " + fmt(ge) + ", variance gap " + fmt(gv)};
    });
  }

  // periodic
  const int n_small = largest_period(fam, 20000, 2);
  suite.run("periodic", "continuation keeps the lattice count", [&] {
    ContinuationConfig cc;
    cc.threads = cfg.threads;
    const auto pts = continue_lattice(fam, n_small, t, cc);
    const bool ok = pts.size() == lattice_size(fam, n_small) &&
                    std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.converged; });
    return std::pair{ok, std::to_string(pts.size()) + " points at period " + std::to_string(n_small)};
  });
  suite.run("periodic", "continued points are distinct and periodic", [&] {
    ContinuationConfig cc;
    cc.threads = cfg.threads;
    const auto pts = continue_lattice(fam, n_small, t, cc);
    double min_gap = std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::size_t start = 0;
    while (start < pts.size()) {
      std::size_t end = start;
      while (end < pts.size() && pts[end].base_index == pts[start].base_index) ++end;
      std::vector<cplx> ws;
      for (std::size_t i = start; i < end; ++i) ws.push_back(pts[i].w);
      std::sort(ws.begin(), ws.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
      for (std::size_t i = 0; i < ws.size(); ++i) {
        for (std::size_t j = i + 1; j < ws.size() && ws[j].real() - ws[i].real() < min_gap; ++j) {
          min_gap = std::min(min_gap, std::abs(ws[j] - ws[i]));
        }
      }
      start = end;
    }
    for (const auto& p : pts) {
      TorusPoint q{p.z, p.w};
      for (int j = 0; j < n_small; ++j) q = eval_map(fam, t, q);
      worst = std::max({worst, std::abs(q.w - p.w), std::abs(q.z - p.z)});
    }
    return std::pair{min_gap > 1e-8 && worst < 1e-8,
                     "min gap " + fmt(min_gap) + ", max return error " + fmt(worst)};
  });
  suite.run("periodic", "eval_map inverts preimages", [&] {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const TorusPoint p = annulus_point(rng, i + 8000, 0.5, 2.0);
      for (const auto& y : preimages(fam, t, p)) {
        const TorusPoint q = eval_map(fam, t, y);
        worst = std::max({worst, std::abs(q.z - p.z), std::abs(q.w - p.w)});
      }
    }
    return std::pair{worst < 1e-9, "max residual " + fmt(worst)};
  });

  // pressure
  const int n_p = largest_period(fam, cfg.pressure_lattice_limit, 3);
  PressureConfig per;
  per.threads = cfg.threads;
  per.continuation.threads = 1;
  PressureConfig pre = per;
  pre.method = PressureMethod::kPreimage;
  suite.run("pressure", "t=0: delta = 1 and P closed form, both methods", [&] {
    double worst_delta = 0.0;
    double worst_p = 0.0;
    for (const auto* pc : {&per, &pre}) {
      const int n = pc->method == PressureMethod::kPeriodic ? n_p : std::min(n_p, 8);
      const PartitionLevels lv(fam, 0.0, n - 1, n, *pc);
      worst_delta = std::max(worst_delta, std::abs(pressure_zero(lv, n, 1e-12) - 1.0));
      for (double s : {0.5, 1.0, 1.5}) {
        worst_p = std::max(worst_p, std::abs(lv.pressure(n, s) - log_jac * (1.0 - s)));
      }
    }
    return std::pair{worst_delta < 1e-9 && worst_p < 1e-10,
                     "delta deviation " + fmt(worst_delta) + ", P deviation " + fmt(worst_p)};
  });

  std::optional<PartitionLevels> levels;
  suite.run("pressure", "P(s) strictly decreasing and convex on [0, 2]", [&] {
    levels.emplace(fam, t, n_p - 2, n_p, per);
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (double s : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const double p = levels->pressure(n_p, s);
      decreasing = decreasing && p < prev;
      prev = p;
    }
    double worst = 0.0;
    const int m = 40;
    for (int i = 1; i < m; ++i) {
      const double h = 2.0 / m;
      const double dd = levels->pressure(n_p, (i - 1) * h) - 2.0 * levels->pressure(n_p, i * h) +
                        levels->pressure(n_p, (i + 1) * h);
      worst = std::min(worst, dd);
    }
    return std::pair{decreasing && worst >= -1e-8, "min second difference " + fmt(worst)};
  });

  double delta_t = 1.0;
  suite.run("pressure", "periodic and preimage methods agree", [&] {
    if (!levels) levels.emplace(fam, t, n_p - 2, n_p, per);
    delta_t = pressure_zero(*levels, n_p, 1e-12);
    const double other = solve_delta(fam, t, n_p, 1e-12, pre).delta;
    const double gap = std::abs(delta_t - other);
    return std::pair{gap < 1e-4, "periodic " + fmt(delta_t) + ", preimage " + fmt(other)};
  });
  const double a_theory = delta_coefficient_theory(fam, false);
  suite.run("pressure", "delta depends on |t| only (theta = pi/2, pi)", [&] {
    const double bound = 0.2 * a_theory * std::norm(t) + 1e-12;
    double worst = 0.0;
    for (const cplx rot : {cplx{0.0, 1.0}, cplx{-1.0, 0.0}}) {
      worst = std::max(worst, std::abs(solve_delta(fam, t * rot, n_p, 1e-12, per).delta - delta_t));
    }
    return std::pair{worst < bound, "max gap " + fmt(worst) + ", bound " + fmt(bound)};
  });

  // expansion
  const double rel_tol = 0.2;
  suite.run("expansion", "fit on {t} and {i t} agree", [&] {
    ExpansionConfig ec;
    ec.sweep.n_max = n_p;
    ec.sweep.pressure = per;
    ec.sweep.hyperbolicity.seed = cfg.seed;
    ec.cubic = false;
    ec.diagnostics = false;
    ec.t_grid = {0.5 * t, t};
    const auto r1 = verify_expansion(fam, ec);
    ec.t_grid = {0.5 * t * cplx{0.0, 1.0}, t * cplx{0.0, 1.0}};
    const auto r2 = verify_expansion(fam, ec);
    if (!r1.fit_ok || !r2.fit_ok) return std::pair{false, std::string("fit failed")};
    const double gap = std::abs(r1.fit.a_fit - r2.fit.a_fit);
    return std::pair{gap < rel_tol * a_theory + 1e-9,
                     "a_fit " + fmt(r1.fit.a_fit) + " vs " + fmt(r2.fit.a_fit)};
  });
  suite.run("expansion", "a_fit moves less than its standard error when n_max grows by 2", [&] {
    // The grid is the default one scaled so that its top point is 2 t_check.
    ExpansionConfig ec;
    ec.sweep.pressure = per;
    ec.sweep.hyperbolicity.seed = cfg.seed;
    ec.diagnostics = false;
    ec.t_grid.clear();
    for (double f : {0.4, 0.8, 1.2, 1.6, 2.0}) ec.t_grid.push_back(f * t);
    ec.sweep.n_max = n_p - 1;
    const auto coarse = verify_expansion(fam, ec);
    ec.sweep.n_max = n_p + 1;
    const auto fine = verify_expansion(fam, ec);
    if (!coarse.fit_ok || !fine.fit_ok) return std::pair{false, std::string("fit failed")};
    const double change = std::abs(fine.fit.a_fit - coarse.fit.a_fit);
    return std::pair{change <= fine.fit.a_stderr,
                     "n_max " + std::to_string(n_p - 1) + " -> " + std::to_string(n_p + 1) + ": change " +
                         fmt(change) + ", a_stderr " + fmt(fine.fit.a_stderr) + ", rms residual " +
                         fmt(fine.fit.residual)};
  });
  suite.run("expansion", "consistency chain of the closed forms", [&] {
    const auto q = theoretical_quantities(fam);
    const double dd = d;
    const double a1 = q.var_theory / (2.0 * log_jac);
    const double vd = q.S / (16.0 * dd * dd * (log_jac / 2.0));
    const double g1 = std::abs(a_theory - a1);
    const double g2 = same_degree ? std::abs(q.vd_coefficient - vd) : 0.0;
    const double scale = std::max(1.0, q.S);
    return std::pair{g1 <= 1e-15 * scale && g2 <= 1e-15 * scale,
                     "gaps " + fmt(g1) + ", " + fmt(g2)};
  });
  suite.run("expansion", "t=0 passes the hyperbolicity heuristic", [&] {
    HyperbolicityConfig hc;
    hc.seed = cfg.seed;
    const auto h = hyperbolicity_heuristic(fam, 0.0, hc);
    return std::pair{h.verdict && std::abs(h.min_vertical_derivative - d) < 1e-6,
                     "min vertical derivative " + fmt(h.min_vertical_derivative)};
  });
  return out;
}

}  // namespace skewdim
