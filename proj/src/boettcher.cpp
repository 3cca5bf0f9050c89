#include "skewdim/boettcher.hpp"

#include "skewdim/error.hpp"

#include <cmath>
#include <vector>

namespace skewdim {

namespace {

// Past this modulus the correction factors are 1 to double precision.
constexpr double kFarRadius = 1e150;

struct FiberOrbit {
  bool escaped = false;
  int escape_step = 0;  // first j with |w_j| > escape radius
  double max_modulus = 0.0;
};

// Runs the fiber orbit until it passes the escape radius or is declared bounded.
FiberOrbit run_until_escape(const SkewFamily& fam, cplx t, TorusPoint p, const GreenParams& params) {
  const double bound = absorbing_radius(fam, t);
  FiberOrbit out;
  out.max_modulus = std::abs(p.w);
  for (int j = 0; j <= params.max_iters; ++j) {
    const double r = std::abs(p.w);
    out.max_modulus = std::max(out.max_modulus, r);
    if (r > params.escape_radius) {
      out.escaped = true;
      out.escape_step = j;
      return out;
    }
    if (j == params.max_iters) break;
    p = eval_map(fam, t, p);
  }
  if (out.max_modulus <= bound) return out;
  fail(ErrorCode::kSlowEscape, "fiber orbit left the absorbing radius but did not reach the escape radius");
}

// r_j = q(w_j) / w_j^d = 1 + t sum_k c_k(z_j) w_j^{-k}.
cplx correction_factor(cplx t, cplx w, std::span<const cplx> c, int d) {
  const cplx inv = 1.0 / w;
  cplx acc{0.0, 0.0};
  // Horner in 1/w over c_d, ..., c_1.
  for (int k = d; k >= 1; --k) acc = (acc + c[static_cast<std::size_t>(k - 1)]) * inv;
  return 1.0 + t * acc;
}

}  // namespace

void GreenParams::validate() const {
  if (!(escape_radius > 10.0)) fail(ErrorCode::kInvalidArgument, "escape_radius must exceed 10");
  if (!(tol > 0.0)) fail(ErrorCode::kInvalidArgument, "tol must be positive");
  if (max_iters < 1) fail(ErrorCode::kInvalidArgument, "max_iters must be positive");
}

double absorbing_radius(const SkewFamily& fam, cplx t) {
  return 4.0 * (1.0 + fam.coefficient_bound() * std::abs(t));
}

double green(const SkewFamily& fam, cplx t, const TorusPoint& p0, const GreenParams& params) {
  params.validate();
  const FiberOrbit orbit = run_until_escape(fam, t, p0, params);
  if (!orbit.escaped) return 0.0;

  TorusPoint p = p0;
  for (int j = 0; j < orbit.escape_step; ++j) p = eval_map(fam, t, p);

  // d^{-n} (log|w_n| + sum_{j>=n} d^{-(j-n+1)} log|r_j|).
  const int d = fam.d();
  const double inv_d = 1.0 / d;
  double tail = std::log(std::abs(p.w));
  double scale = inv_d;
  std::vector<cplx> c(static_cast<std::size_t>(d));
  while (std::abs(p.w) < kFarRadius) {
    for (int k = 1; k <= d; ++k) c[static_cast<std::size_t>(k - 1)] = fam.c(k)(p.z);
    const FiberPoly q(d, t, c);
    const double term = scale * std::log(std::abs(correction_factor(t, p.w, c, d)));
    tail += term;
    if (std::abs(term) < params.tol * 1e-4) break;
    p = {unit(std::pow(p.z, fam.d_prime())), q.value(p.w)};
    scale *= inv_d;
  }
  return std::pow(inv_d, orbit.escape_step) * tail;
}

namespace {

// log phi and d(log phi)/dw along the fiber orbit of p.
struct LogBoettcher {
  cplx log_phi;
  cplx dlog_phi;
};

LogBoettcher log_boettcher(const SkewFamily& fam, cplx t, const TorusPoint& p0, const GreenParams& params) {
  const int d = fam.d();
  const double inv_d = 1.0 / d;
  TorusPoint p = p0;
  cplx log_phi = std::log(p.w);
  cplx rho = 1.0 / p.w;  // (dw_j/dw_0) / w_j
  cplx dlog_phi = rho;
  double scale = inv_d;
  std::vector<cplx> c(static_cast<std::size_t>(d));
  for (int j = 0; j < params.max_iters + 64; ++j) {
    for (int k = 1; k <= d; ++k) c[static_cast<std::size_t>(k - 1)] = fam.c(k)(p.z);
    const FiberPoly q(d, t, c);
    const cplx inv = 1.0 / p.w;
    cplx acc{0.0, 0.0};
    cplx dacc{0.0, 0.0};  // sum_k (-k) c_k w^{-k}
    cplx pw{1.0, 0.0};
    for (int k = 1; k <= d; ++k) {
      pw *= inv;
      acc += c[static_cast<std::size_t>(k - 1)] * pw;
      dacc -= static_cast<double>(k) * c[static_cast<std::size_t>(k - 1)] * pw;
    }
    const cplx r = 1.0 + t * acc;
    if (r.real() <= 0.0) {
      fail(ErrorCode::kBranchAmbiguity, "Boettcher product factor left the right half-plane");
    }
    const cplx dr = t * dacc * rho;
    const cplx term = scale * clog1p(t * acc);
    log_phi += term;
    dlog_phi += scale * dr / r;
    if (std::abs(p.w) > kFarRadius || (std::abs(p.w) > params.escape_radius &&
                                       std::abs(term) < params.tol * 1e-4 &&
                                       std::abs(scale * dr / r) < params.tol * 1e-4 * std::abs(dlog_phi))) {
      return {log_phi, dlog_phi};
    }
    cplx qv, dq;
    q.eval(p.w, qv, dq);
    rho = dq * p.w * rho / qv;
    p = {unit(std::pow(p.z, fam.d_prime())), qv};
    scale *= inv_d;
  }
  fail(ErrorCode::kSlowEscape, "Boettcher product did not converge");
}

}  // namespace

cplx boettcher_coord(const SkewFamily& fam, cplx t, const TorusPoint& p, const GreenParams& params) {
  if (green(fam, t, p, params) <= 0.0) {
    fail(ErrorCode::kNotInBasin, "point is not in the basin of infinity");
  }
  return std::exp(log_boettcher(fam, t, p, params).log_phi);
}

cplx conjugacy_H(const SkewFamily& fam, cplx t, cplx z, cplx omega, const GreenParams& params) {
  params.validate();
  if (!(std::abs(omega) > 1.0)) fail(ErrorCode::kInvalidArgument, "conjugacy_H needs |omega| > 1");
  if (t == cplx{0.0, 0.0}) return omega;
  const cplx zu = unit(z);
  cplx w = omega;
  for (int it = 0; it < 50; ++it) {
    if (std::abs(w) <= 1.0) break;
    LogBoettcher lb;
    try {
      lb = log_boettcher(fam, t, {zu, w}, params);
    } catch (const Error&) {
      break;
    }
    const cplx phi = std::exp(lb.log_phi);
    const cplx step = (phi - omega) / (phi * lb.dlog_phi);
    w -= step;
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) break;
    if (std::abs(step) <= 1e-14 * std::abs(w)) return w;
  }
  fail(ErrorCode::kNewtonDivergence, "Newton inversion of the Boettcher coordinate did not converge");
}

}  // namespace skewdim
