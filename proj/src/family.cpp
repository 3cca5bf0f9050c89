#include "skewdim/family.hpp"

#include "skewdim/error.hpp"

#include <cmath>
#include <string>

namespace skewdim {

CoeffPoly::CoeffPoly(std::vector<cplx> coefficients) : a_(std::move(coefficients)) {
  for (const cplx& a : a_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      fail(ErrorCode::kInvalidArgument, "coefficient polynomial has a non-finite entry");
    }
  }
}

cplx CoeffPoly::operator()(cplx z) const {
  cplx acc{0.0, 0.0};
  for (auto it = a_.rbegin(); it != a_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

bool CoeffPoly::is_zero() const {
  for (const cplx& a : a_) {
    if (a != cplx{0.0, 0.0}) return false;
  }
  return true;
}

double CoeffPoly::circle_l2_squared() const {
  double s = 0.0;
  for (const cplx& a : a_) s += std::norm(a);
  return s;
}

double CoeffPoly::circle_sup_bound() const {
  double s = 0.0;
  for (const cplx& a : a_) s += std::abs(a);
  return s;
}

SkewFamily::SkewFamily(int d, int d_prime, std::vector<CoeffPoly> coeffs)
    : d_(d), d_prime_(d_prime), coeffs_(std::move(coeffs)) {
  if (d < 2) fail(ErrorCode::kInvalidArgument, "d must be >= 2");
  if (d_prime < 2) fail(ErrorCode::kInvalidArgument, "d_prime must be >= 2");
  if (static_cast<int>(coeffs_.size()) != d) {
    fail(ErrorCode::kInvalidArgument, "expected " + std::to_string(d) +
                                          " coefficient polynomials, got " +
                                          std::to_string(coeffs_.size()));
  }
}

double SkewFamily::coefficient_bound() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += c.circle_sup_bound();
  return s;
}

bool SkewFamily::is_trivial() const {
  for (const auto& c : coeffs_) {
    if (!c.is_zero()) return false;
  }
  return true;
}

SkewFamily SkewFamily::scaled(cplx lambda) const {
  std::vector<CoeffPoly> out;
  out.reserve(coeffs_.size());
  for (const auto& c : coeffs_) {
    std::vector<cplx> a(c.coefficients().begin(), c.coefficients().end());
    for (auto& x : a) x *= lambda;
    out.emplace_back(std::move(a));
  }
  return SkewFamily(d_, d_prime_, std::move(out));
}

FiberPoly::FiberPoly(const SkewFamily& fam, cplx t, cplx z) : t_(t) {
  c_.reserve(static_cast<std::size_t>(fam.d()));
  for (int k = 1; k <= fam.d(); ++k) c_.push_back(fam.c(k)(z));
}

FiberPoly::FiberPoly(int d, cplx t, std::span<const cplx> c_values)
    : t_(t), c_(c_values.begin(), c_values.end()) {
  if (static_cast<int>(c_.size()) != d) {
    fail(ErrorCode::kInvalidArgument, "FiberPoly: wrong number of coefficient values");
  }
}

cplx FiberPoly::value(cplx w) const {
  cplx q{1.0, 0.0};
  for (const cplx& ck : c_) q = q * w + t_ * ck;
  return q;
}

void FiberPoly::eval(cplx w, cplx& q, cplx& dq) const {
  q = cplx{1.0, 0.0};
  dq = cplx{0.0, 0.0};
  for (const cplx& ck : c_) {
    dq = dq * w + q;
    q = q * w + t_ * ck;
  }
}

void FiberPoly::eval(cplx w, cplx& q, cplx& dq, cplx& dqdt) const {
  q = cplx{1.0, 0.0};
  dq = cplx{0.0, 0.0};
  dqdt = cplx{0.0, 0.0};
  for (const cplx& ck : c_) {
    dq = dq * w + q;
    q = q * w + t_ * ck;
    dqdt = dqdt * w + ck;
  }
}

std::vector<cplx> FiberPoly::shifted_coefficients(cplx rhs) const {
  const std::size_t d = c_.size();
  std::vector<cplx> a(d + 1);
  a[d] = 1.0;
  for (std::size_t k = 1; k <= d; ++k) a[d - k] = t_ * c_[k - 1];
  a[0] -= rhs;
  return a;
}

std::vector<cplx> FiberPoly::derivative_coefficients() const {
  const std::size_t d = c_.size();
  std::vector<cplx> a(d);
  a[d - 1] = static_cast<double>(d);
  for (std::size_t k = 1; k < d; ++k) {
    a[d - 1 - k] = static_cast<double>(d - k) * t_ * c_[k - 1];
  }
  return a;
}

TorusPoint eval_map(const SkewFamily& fam, cplx t, const TorusPoint& p) {
  const FiberPoly q(fam, t, p.z);
  return {unit(std::pow(p.z, fam.d_prime())), q.value(p.w)};
}

cplx vertical_derivative(const SkewFamily& fam, cplx t, const TorusPoint& p) {
  cplx q, dq;
  FiberPoly(fam, t, p.z).eval(p.w, q, dq);
  return dq;
}

double potential(const SkewFamily& fam, cplx t, const TorusPoint& p) {
  const double dq = std::abs(vertical_derivative(fam, t, p));
  if (dq < 1e-30) fail(ErrorCode::kCriticalPoint, "potential undefined at a fiber critical point");
  return -std::log(static_cast<double>(fam.d_prime()) * dq);
}

TheoreticalQuantities theoretical_quantities(const SkewFamily& fam) {
  const double d = fam.d();
  const double log_d = std::log(d);
  const double log_dp = std::log(static_cast<double>(fam.d_prime()));
  TheoreticalQuantities q;
  for (int k = 1; k <= fam.d(); ++k) {
    q.S += static_cast<double>(k) * k * fam.c(k).circle_l2_squared();
  }
  q.I_theory = q.S / (d * d * log_d);
  q.var_theory = q.S / (2.0 * d * d);
  q.ddot_delta = q.var_theory / (log_d + log_dp);
  q.vd_coefficient = q.ddot_delta / 4.0;

  // int c_d(z) conj(c_1(z^d)) dLeb = sum_l a_{d, d l} conj(a_{1, l}).
  const auto cd = fam.c(fam.d()).coefficients();
  const auto c1 = fam.c(1).coefficients();
  double re = 0.0;
  for (std::size_t l = 0; l < c1.size(); ++l) {
    const std::size_t j = l * static_cast<std::size_t>(fam.d());
    if (j < cd.size()) re += (cd[j] * std::conj(c1[l])).real();
  }
  q.cross_term = 2.0 * d * re;
  return q;
}

double delta_coefficient_theory(const SkewFamily& fam, bool include_cross_term) {
  const auto q = theoretical_quantities(fam);
  const double d = fam.d();
  const double s = q.S + (include_cross_term ? q.cross_term : 0.0);
  return s / (4.0 * d * d * (std::log(d) + std::log(static_cast<double>(fam.d_prime()))));
}

}  // namespace skewdim
