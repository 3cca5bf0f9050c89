#include "skewdim/periodic.hpp"

#include "skewdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace skewdim {

namespace {

bool finite(cplx x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); }

std::uint64_t checked_pow_minus_one(int base, int n) {
  std::uint64_t p = 1;
  for (int i = 0; i < n; ++i) {
    if (p > (std::uint64_t{1} << 58)) fail(ErrorCode::kBudgetExceeded, "period too large");
    p *= static_cast<std::uint64_t>(base);
  }
  return p - 1;
}

// c_k(z_m) along the base orbit of a period-n point, row-major by m.
std::vector<cplx> base_orbit_coefficients(const SkewFamily& fam, int n, std::uint64_t base_index) {
  const std::uint64_t M = checked_pow_minus_one(fam.d_prime(), n);
  const int d = fam.d();
  std::vector<cplx> table(static_cast<std::size_t>(n * d));
  std::uint64_t idx = base_index % M;
  for (int m = 0; m < n; ++m) {
    const cplx z = root_of_unity(idx, M);
    for (int k = 1; k <= d; ++k) table[static_cast<std::size_t>(m * d + k - 1)] = fam.c(k)(z);
    idx = static_cast<std::uint64_t>((static_cast<unsigned __int128>(idx) * fam.d_prime()) % M);
  }
  return table;
}

struct OrbitEval {
  cplx value;  // Q(w)
  cplx dw;     // dQ/dw
  cplx dt;     // dQ/dt
};

// n-fold fiber composition along a base orbit, run point by point.
OrbitEval run_orbit(const std::vector<cplx>& table, int d, int n, cplx t, cplx w) {
  cplx der{1.0, 0.0};
  cplx dert{0.0, 0.0};
  for (int m = 0; m < n; ++m) {
    const cplx* c = table.data() + static_cast<std::ptrdiff_t>(m) * d;
    cplx q{1.0, 0.0};
    cplx dq{0.0, 0.0};
    cplx dqt{0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      dq = dq * w + q;
      q = q * w + t * c[k];
      dqt = dqt * w + c[k];
    }
    dert = dq * dert + dqt;
    der *= dq;
    w = q;
  }
  return {w, der, dert};
}

struct StepResult {
  bool ok = false;
  cplx w;
  cplx multiplier;
};

StepResult corrector(const std::vector<cplx>& table, int d, int n, cplx t, cplx w_pred,
                     const ContinuationConfig& cfg) {
  StepResult out;
  cplx w = w_pred;
  bool converged = false;
  for (int it = 0; it < cfg.max_newton; ++it) {
    const OrbitEval e = run_orbit(table, d, n, t, w);
    const cplx step = (e.value - w) / (e.dw - 1.0);
    w -= step;
    if (!finite(w)) return out;
    if (std::abs(step) <= cfg.newton_tol * std::max(1.0, std::abs(w))) {
      converged = true;
      break;
    }
  }
  if (!converged) return out;
  const OrbitEval e = run_orbit(table, d, n, t, w);
  if (!(std::abs(e.value - w) < 1e-10)) return out;
  if (!(std::abs(e.dw) > cfg.min_multiplier)) return out;
  // Neighbouring solutions sit about 2 pi |w| / |Q'| apart; a larger
  // correction means Newton jumped to another branch.
  if (std::abs(w - w_pred) > 0.3 * kTwoPi * std::abs(w) / std::abs(e.dw)) return out;
  out.ok = true;
  out.w = w;
  out.multiplier = e.dw;
  return out;
}

PeriodicOrbitPoint continue_with_table(const std::vector<cplx>& table, int d,
                                       const PeriodicOrbitPoint& point, cplx t_target,
                                       const ContinuationConfig& cfg) {
  PeriodicOrbitPoint out = point;
  const int n = point.n;
  const cplx t0 = point.continued_to_t;
  const cplx span = t_target - t0;
  if (span == cplx{0.0, 0.0}) {
    const OrbitEval e = run_orbit(table, d, n, t0, point.w);
    out.multiplier = e.dw;
    return out;
  }
  const double nominal = 1.0 / cfg.resolved_steps(span);
  double s = 0.0;
  cplx w = point.w;
  while (s < 1.0) {
    double ds = std::min(nominal, 1.0 - s);
    bool advanced = false;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
      const double s_next = (1.0 - s - ds) < 1e-12 ? 1.0 : s + ds;
      const cplx ta = t0 + s * span;
      const cplx tb = s_next >= 1.0 ? t_target : t0 + s_next * span;
      const OrbitEval e = run_orbit(table, d, n, ta, w);
      const cplx w_pred = w - (tb - ta) * e.dt / (e.dw - 1.0);
      const StepResult r = corrector(table, d, n, tb, w_pred, cfg);
      if (r.ok) {
        w = r.w;
        out.multiplier = r.multiplier;
        s = s_next;
        advanced = true;
        break;
      }
      ds *= 0.5;
    }
    if (!advanced) {
      const cplx ta = t0 + s * span;
      fail(ErrorCode::kNonHyperbolicContinuation,
           "continuation of a period-" + std::to_string(n) + " point failed near t = (" +
               std::to_string(ta.real()) + ", " + std::to_string(ta.imag()) + ")");
    }
  }
  out.w = w;
  out.continued_to_t = t_target;
  out.converged = true;
  return out;
}

}  // namespace

int ContinuationConfig::resolved_steps(cplx t) const {
  if (steps > 0) return steps;
  return std::max(5, static_cast<int>(std::ceil(std::abs(t) / 0.01 - 1e-9)));
}

std::uint64_t lattice_size(const SkewFamily& fam, int n) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "period must be >= 1");
  const std::uint64_t a = checked_pow_minus_one(fam.d_prime(), n);
  const std::uint64_t b = checked_pow_minus_one(fam.d(), n);
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    fail(ErrorCode::kBudgetExceeded, "lattice size overflows");
  }
  return a * b;
}

std::vector<PeriodicOrbitPoint> enumerate_t0(const SkewFamily& fam, int n, std::uint64_t budget) {
  const std::uint64_t size = lattice_size(fam, n);
  if (size > budget) {
    fail(ErrorCode::kBudgetExceeded, "period-" + std::to_string(n) + " lattice has " +
                                         std::to_string(size) + " points, budget " +
                                         std::to_string(budget));
  }
  const std::uint64_t M = checked_pow_minus_one(fam.d_prime(), n);
  const std::uint64_t K = checked_pow_minus_one(fam.d(), n);
  const double dn = std::pow(static_cast<double>(fam.d()), n);
  std::vector<PeriodicOrbitPoint> out;
  out.reserve(static_cast<std::size_t>(size));
  for (std::uint64_t i = 0; i < M; ++i) {
    for (std::uint64_t j = 0; j < K; ++j) {
      PeriodicOrbitPoint p;
      p.n = n;
      p.base_index = i;
      p.fiber_index = j;
      p.z = root_of_unity(i, M);
      p.w = root_of_unity(j, K);
      p.continued_to_t = 0.0;
      p.converged = true;
      // Q'(w) = d^n w^{d^n - 1} = d^n / w on the lattice.
      p.multiplier = dn / p.w;
      out.push_back(p);
    }
  }
  return out;
}

PeriodicOrbitPoint continue_in_t(const SkewFamily& fam, const PeriodicOrbitPoint& point,
                                 cplx t_target, const ContinuationConfig& cfg) {
  if (!point.converged) fail(ErrorCode::kInvalidArgument, "continuation needs a converged start point");
  const auto table = base_orbit_coefficients(fam, point.n, point.base_index);
  return continue_with_table(table, fam.d(), point, t_target, cfg);
}

std::vector<PeriodicOrbitPoint> continue_fiber_block(const SkewFamily& fam, int n,
                                                     std::uint64_t base_index, cplx t,
                                                     const ContinuationConfig& cfg) {
  const std::uint64_t M = checked_pow_minus_one(fam.d_prime(), n);
  const std::uint64_t K = checked_pow_minus_one(fam.d(), n);
  if (base_index >= M) fail(ErrorCode::kInvalidArgument, "base index out of range");
  const auto table = base_orbit_coefficients(fam, n, base_index);
  const double dn = std::pow(static_cast<double>(fam.d()), n);
  std::vector<PeriodicOrbitPoint> out;
  out.reserve(static_cast<std::size_t>(K));
  for (std::uint64_t j = 0; j < K; ++j) {
    PeriodicOrbitPoint p;
    p.n = n;
    p.base_index = base_index;
    p.fiber_index = j;
    p.z = root_of_unity(base_index, M);
    p.w = root_of_unity(j, K);
    p.continued_to_t = 0.0;
    p.converged = true;
    p.multiplier = dn / p.w;
    out.push_back(continue_with_table(table, fam.d(), p, t, cfg));
  }
  return out;
}

std::vector<PeriodicOrbitPoint> continue_lattice(const SkewFamily& fam, int n, cplx t,
                                                 const ContinuationConfig& cfg) {
  const std::uint64_t size = lattice_size(fam, n);
  if (size > cfg.budget) {
    fail(ErrorCode::kBudgetExceeded, "period-" + std::to_string(n) + " lattice exceeds the budget");
  }
  const std::uint64_t M = checked_pow_minus_one(fam.d_prime(), n);
  std::vector<std::vector<PeriodicOrbitPoint>> blocks(static_cast<std::size_t>(M));
  parallel_chunks(static_cast<std::size_t>(M), cfg.threads, [&](std::size_t i) {
    blocks[i] = continue_fiber_block(fam, n, i, t, cfg);
  });
  std::vector<PeriodicOrbitPoint> out;
  out.reserve(static_cast<std::size_t>(size));
  for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

namespace {

cplx horner(const std::vector<cplx>& a, cplx x) {
  cplx acc{0.0, 0.0};
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void horner_with_derivative(const std::vector<cplx>& a, cplx x, cplx& p, cplx& dp) {
  p = 0.0;
  dp = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    dp = dp * x + p;
    p = p * x + *it;
  }
}

// Newton from the d-th roots of target, the exact roots when t c = 0. Accepted
// only if every start converges and the roots stay well separated.
bool newton_from_unperturbed(const std::vector<cplx>& a, cplx target, std::vector<cplx>& out) {
  const std::size_t d = a.size() - 1;
  const double rho = std::pow(std::abs(target), 1.0 / static_cast<double>(d));
  if (!(rho > 1e-6)) return false;
  double max_coeff = 0.0;
  for (const cplx& x : a) max_coeff = std::max(max_coeff, std::abs(x));
  const double tol = 1e-9 * (1.0 + max_coeff);
  const double theta = std::arg(target) / static_cast<double>(d);
  const std::size_t start = out.size();
  for (std::size_t j = 0; j < d; ++j) {
    cplx w = std::polar(rho, theta + kTwoPi * static_cast<double>(j) / static_cast<double>(d));
    bool ok = false;
    for (int it = 0; it < 30; ++it) {
      cplx p, dp;
      horner_with_derivative(a, w, p, dp);
      if (dp == cplx{0.0, 0.0}) break;
      const cplx step = p / dp;
      w -= step;
      if (!finite(w)) break;
      if (std::abs(step) <= 1e-15 * std::abs(w)) {
        ok = true;
        break;
      }
    }
    if (!ok || !(std::abs(horner(a, w)) < tol)) {
      out.resize(start);
      return false;
    }
    for (std::size_t l = start; l < out.size(); ++l) {
      if (std::abs(out[l] - w) < 1e-3 * rho) {
        out.resize(start);
        return false;
      }
    }
    out.push_back(w);
  }
  return true;
}

}  // namespace

void fiber_roots(std::span<const cplx> c, cplx t, cplx target, std::vector<cplx>& out) {
  const std::size_t d = c.size();
  if (d == 2) {
    // w^2 + b w + e = 0 with b = t c_1, e = t c_2 - target.
    const cplx b = t * c[0];
    const cplx e = t * c[1] - target;
    const cplx disc = std::sqrt(b * b - 4.0 * e);
    const cplx q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    if (q == cplx{0.0, 0.0}) {
      out.push_back(0.0);
      out.push_back(0.0);
      return;
    }
    out.push_back(q);
    out.push_back(e / q);
    return;
  }
  std::vector<cplx> a(d + 1);
  a[d] = 1.0;
  for (std::size_t k = 1; k <= d; ++k) a[d - k] = t * c[k - 1];
  a[0] -= target;
  if (newton_from_unperturbed(a, target, out)) return;
  const auto r = poly_roots(a);
  out.insert(out.end(), r.begin(), r.end());
}

std::vector<TorusPoint> preimages(const SkewFamily& fam, cplx t, const TorusPoint& p) {
  const int dp = fam.d_prime();
  const double theta = std::arg(p.z);
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(dp * fam.d()));
  std::vector<cplx> c(static_cast<std::size_t>(fam.d()));
  std::vector<cplx> roots;
  for (int m = 0; m < dp; ++m) {
    const cplx z = std::polar(1.0, (theta + kTwoPi * m) / dp);
    for (int k = 1; k <= fam.d(); ++k) c[static_cast<std::size_t>(k - 1)] = fam.c(k)(z);
    roots.clear();
    fiber_roots(c, t, p.w, roots);
    for (const cplx& w : roots) out.push_back({z, w});
  }
  return out;
}

std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs) {
  if (coeffs.size() < 2) fail(ErrorCode::kInvalidArgument, "poly_roots needs degree >= 1");
  const std::size_t deg = coeffs.size() - 1;
  if (deg > 64) fail(ErrorCode::kInvalidArgument, "poly_roots supports degree <= 64");
  if (coeffs.back() == cplx{0.0, 0.0}) fail(ErrorCode::kInvalidArgument, "leading coefficient is zero");
  for (const cplx& a : coeffs) {
    if (!finite(a)) fail(ErrorCode::kInvalidArgument, "non-finite polynomial coefficient");
  }
  double max_coeff = 0.0;
  for (const cplx& a : coeffs) max_coeff = std::max(max_coeff, std::abs(a));
  const double tol = 1e-9 * (1.0 + max_coeff);

  std::vector<cplx> monic(coeffs.size());
  for (std::size_t j = 0; j <= deg; ++j) monic[j] = coeffs[j] / coeffs.back();

  std::vector<cplx> roots;
  if (deg == 1) {
    roots = {-monic[0]};
  } else if (deg == 2) {
    const std::vector<cplx> c{monic[1], monic[0]};
    // fiber_roots solves w^2 + c1 w + c2 = 0 with t = 1, target 0.
    fiber_roots(c, 1.0, 0.0, roots);
  } else {
    // Aberth-Ehrlich from a circle of radius bounded by the Fujiwara bound.
    double radius = 0.0;
    for (std::size_t j = 0; j < deg; ++j) {
      radius = std::max(radius, std::pow(std::abs(monic[j]), 1.0 / static_cast<double>(deg - j)));
    }
    radius = std::max(radius, 1e-3);
    roots.resize(deg);
    for (std::size_t j = 0; j < deg; ++j) {
      roots[j] = std::polar(radius, kTwoPi * (static_cast<double>(j) + 0.25) / static_cast<double>(deg));
    }
    bool done = false;
    for (int it = 0; it < 500 && !done; ++it) {
      double worst = 0.0;
      for (std::size_t j = 0; j < deg; ++j) {
        cplx p, dp;
        horner_with_derivative(monic, roots[j], p, dp);
        if (p == cplx{0.0, 0.0}) continue;
        const cplx ratio = p / dp;
        cplx sum{0.0, 0.0};
        for (std::size_t l = 0; l < deg; ++l) {
          if (l != j) sum += 1.0 / (roots[j] - roots[l]);
        }
        const cplx step = ratio / (1.0 - ratio * sum);
        if (finite(step)) roots[j] -= step;
        worst = std::max(worst, std::abs(step) / std::max(1.0, std::abs(roots[j])));
      }
      done = worst < 1e-15;
    }
  }
  // Newton polish against the caller's coefficients.
  for (cplx& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cplx p, dp;
      horner_with_derivative(coeffs, r, p, dp);
      if (dp == cplx{0.0, 0.0}) break;
      const cplx step = p / dp;
      const cplx next = r - step;
      if (!finite(next) || std::abs(horner(coeffs, next)) > std::abs(p)) break;
      r = next;
    }
    if (!finite(r) || !(std::abs(horner(coeffs, r)) < tol)) {
      fail(ErrorCode::kRootFindingFailure, "root finder stalled on an ill-conditioned cluster");
    }
  }
  std::stable_sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return roots;
}

}  // namespace skewdim
