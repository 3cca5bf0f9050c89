#include "skewdim/expansion.hpp"

#include "skewdim/boettcher.hpp"
#include "skewdim/error.hpp"

#include <algorithm>
#include <cmath>

namespace skewdim {

HyperbolicityDiagnostic hyperbolicity_heuristic(const SkewFamily& fam, cplx t,
                                                const HyperbolicityConfig& cfg) {
  HyperbolicityDiagnostic out;
  const double bound = absorbing_radius(fam, t);
  const CounterRng rng(cfg.seed);
  const auto branches = static_cast<std::uint64_t>(fam.d() * fam.d_prime());

  // Backward orbits of a basin point accumulate on J.
  double min_der = std::numeric_limits<double>::infinity();
  try {
    for (int i = 0; i < cfg.j_samples; ++i) {
      const auto si = static_cast<std::uint64_t>(i);
      TorusPoint p{std::polar(1.0, kTwoPi * rng.uniform(si, 0)), 2.0 * bound};
      for (int j = 0; j < cfg.depth; ++j) {
        const auto pre = preimages(fam, t, p);
        p = pre[static_cast<std::size_t>(rng.bits(si, static_cast<std::uint64_t>(j) + 1) % branches)];
      }
      min_der = std::min(min_der, std::abs(vertical_derivative(fam, t, p)));
    }
  } catch (const Error&) {
    min_der = 0.0;
  }
  out.min_vertical_derivative = min_der;

  bool bounded = true;
  double max_mod = 0.0;
  for (int i = 0; i < cfg.z_samples && bounded; ++i) {
    const cplx z = root_of_unity(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(cfg.z_samples));
    std::vector<cplx> crit;
    try {
      crit = poly_roots(FiberPoly(fam, t, z).derivative_coefficients());
    } catch (const Error&) {
      bounded = false;
      break;
    }
    for (const cplx& c : crit) {
      TorusPoint p{z, c};
      for (int j = 0; j < cfg.critical_iters; ++j) {
        p = eval_map(fam, t, p);
        const double r = std::abs(p.w);
        max_mod = std::max(max_mod, std::isfinite(r) ? r : std::numeric_limits<double>::max());
        if (!(r <= bound)) {
          bounded = false;
          break;
        }
      }
      if (!bounded) break;
    }
  }
  out.critical_orbit_max_modulus = max_mod;
  out.fiberwise_connected = bounded;
  out.verdict = bounded && min_der > cfg.min_derivative;
  return out;
}

std::vector<SweepEntry> sweep_delta(const SkewFamily& fam, const std::vector<cplx>& t_grid,
                                    const SweepConfig& cfg) {
  if (t_grid.empty()) fail(ErrorCode::kInvalidArgument, "t grid is empty");
  std::vector<SweepEntry> out;
  out.reserve(t_grid.size());
  for (const cplx& t : t_grid) {
    SweepEntry e;
    e.t = t;
    e.hyperbolicity = hyperbolicity_heuristic(fam, t, cfg.hyperbolicity);
    if (!e.hyperbolicity.verdict) {
      e.error_code = std::string(code_name(ErrorCode::kNonHyperbolicContinuation));
      e.error_message = "hyperbolicity heuristic rejected this parameter";
      out.push_back(e);
      continue;
    }
    try {
      e.result = solve_delta(fam, t, cfg.n_max, cfg.tol, cfg.pressure);
      e.ok = true;
    } catch (const Error& err) {
      e.error_code = std::string(code_name(err.code()));
      e.error_message = err.what();
    }
    out.push_back(e);
  }
  return out;
}

FitResult fit_coefficient(const std::vector<cplx>& t_grid, const std::vector<double>& deltas, bool cubic) {
  if (t_grid.size() != deltas.size()) fail(ErrorCode::kInvalidArgument, "grid and deltas differ in length");
  const int p = cubic ? 2 : 1;
  std::vector<double> mags;
  for (const cplx& t : t_grid) mags.push_back(std::abs(t));
  std::vector<double> distinct;
  for (double m : mags) {
    if (m > 0.0 && std::none_of(distinct.begin(), distinct.end(),
                                [&](double x) { return std::abs(x - m) <= 1e-14 * m; })) {
      distinct.push_back(m);
    }
  }
  const bool all_equal = std::all_of(mags.begin(), mags.end(),
                                     [&](double m) { return std::abs(m - mags.front()) <= 1e-14 * m; });
  if (mags.empty() || all_equal || static_cast<int>(distinct.size()) < p) {
    fail(ErrorCode::kDegenerateGrid, "the grid needs more distinct |t| values");
  }

  const auto m = static_cast<Eigen::Index>(mags.size());
  Eigen::MatrixXd X(m, p);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = mags[static_cast<std::size_t>(i)];
    X(i, 0) = a * a;
    if (cubic) X(i, 1) = a * a * a;
    y(i) = deltas[static_cast<std::size_t>(i)] - 1.0;
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = y - X * beta;
  const double rss = r.squaredNorm();

  FitResult out;
  out.cubic = cubic;
  out.points = static_cast<int>(m);
  out.a_fit = beta(0);
  out.b_cubic = cubic ? beta(1) : 0.0;
  out.residual = std::sqrt(rss / static_cast<double>(m));
  if (m > p) {
    const Eigen::MatrixXd cov = (X.transpose() * X).inverse();
    out.a_stderr = std::sqrt(rss / static_cast<double>(m - p) * cov(0, 0));
  }
  return out;
}

ExpansionReport verify_expansion(const SkewFamily& fam, const ExpansionConfig& cfg) {
  ExpansionReport rep;
  rep.tolerance = cfg.tolerance;
  rep.theory = theoretical_quantities(fam);
  rep.a_theory = delta_coefficient_theory(fam, false);
  rep.a_theory_with_cross = delta_coefficient_theory(fam, true);
  rep.vd_coefficient_theory = rep.a_theory / 2.0;
  rep.entries = sweep_delta(fam, cfg.t_grid, cfg.sweep);

  std::vector<cplx> ts;
  std::vector<double> ds;
  for (const auto& e : rep.entries) {
    if (e.ok) {
      ts.push_back(e.t);
      ds.push_back(e.result.delta);
    }
  }
  try {
    rep.fit = fit_coefficient(ts, ds, cfg.cubic);
    rep.fit_quadratic = fit_coefficient(ts, ds, false);
    rep.fit_ok = true;
  } catch (const Error& err) {
    rep.fit_error = err.what();
  }
  if (rep.fit_ok) {
    rep.vd_coefficient_fit = rep.fit.a_fit / 2.0;
    if (rep.a_theory > 0.0) {
      rep.relative_error = std::abs(rep.fit.a_fit - rep.a_theory) / rep.a_theory;
      rep.verdict = rep.relative_error < cfg.tolerance;
    } else {
      rep.relative_error = std::abs(rep.fit.a_fit);
      rep.verdict = rep.relative_error < 1e-8;
    }
    rep.verdict = rep.verdict && ts.size() == rep.entries.size();
  }

  if (cfg.diagnostics && fam.d() == fam.d_prime()) {
    try {
      rep.energy = energy_quadrature(fam, cfg.energy);
      rep.variance = variance_mc(fam, cfg.variance);
    } catch (const Error& err) {
      rep.diagnostics_error = err.what();
    }
  }
  return rep;
}

}  // namespace skewdim
