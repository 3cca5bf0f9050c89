#pragma once

#include "skewdim/numerics.hpp"

#include <span>
#include <vector>

namespace skewdim {

// c(z) = sum_j a_j z^j. The empty polynomial is zero.
class CoeffPoly {
 public:
  CoeffPoly() = default;
  explicit CoeffPoly(std::vector<cplx> coefficients);

  cplx operator()(cplx z) const;

  std::span<const cplx> coefficients() const { return a_; }
  bool is_zero() const;
  // sum_j |a_j|^2 = integral of |c|^2 over the unit circle.
  double circle_l2_squared() const;
  // sum_j |a_j|, an upper bound for sup_{|z|=1} |c(z)|.
  double circle_sup_bound() const;

 private:
  std::vector<cplx> a_;
};

struct TorusPoint {
  cplx z;
  cplx w;
};

// F_t(z, w) = (z^{d'}, w^d + t * sum_{k=1}^d c_k(z) w^{d-k}).
class SkewFamily {
 public:
  SkewFamily(int d, int d_prime, std::vector<CoeffPoly> coeffs);

  int d() const { return d_; }
  int d_prime() const { return d_prime_; }
  // 1-based, k in [1, d].
  const CoeffPoly& c(int k) const { return coeffs_[static_cast<std::size_t>(k - 1)]; }
  std::span<const CoeffPoly> coeffs() const { return coeffs_; }

  // sum_k sup_{|z|=1} |c_k| (upper bound).
  double coefficient_bound() const;
  bool is_trivial() const;
  // Family with every c_k replaced by lambda * c_k.
  SkewFamily scaled(cplx lambda) const;

 private:
  int d_;
  int d_prime_;
  std::vector<CoeffPoly> coeffs_;
};

// The fiber polynomial q_t(z, .) for one fixed base point and parameter.
// Holds the values c_k(z) so repeated evaluation along an orbit is cheap.
class FiberPoly {
 public:
  FiberPoly(const SkewFamily& fam, cplx t, cplx z);
  FiberPoly(int d, cplx t, std::span<const cplx> c_values);

  int degree() const { return static_cast<int>(c_.size()); }
  cplx value(cplx w) const;
  // q and dq/dw.
  void eval(cplx w, cplx& q, cplx& dq) const;
  // q, dq/dw and dq/dt.
  void eval(cplx w, cplx& q, cplx& dq, cplx& dqdt) const;
  // Coefficients of q(w) - rhs in ascending powers of w.
  std::vector<cplx> shifted_coefficients(cplx rhs) const;
  // Coefficients of dq/dw in ascending powers of w.
  std::vector<cplx> derivative_coefficients() const;

 private:
  cplx t_;
  std::vector<cplx> c_;  // c_k(z), k = 1..d
};

TorusPoint eval_map(const SkewFamily& fam, cplx t, const TorusPoint& p);
cplx vertical_derivative(const SkewFamily& fam, cplx t, const TorusPoint& p);
// phi_t = -log |Jac F_t| on |z| = 1. Throws CriticalPoint where d_w q vanishes.
double potential(const SkewFamily& fam, cplx t, const TorusPoint& p);

struct TheoreticalQuantities {
  double S = 0.0;               // sum_k k^2 int |c_k|^2
  double I_theory = 0.0;        // S / (d^2 log d)
  double var_theory = 0.0;      // S / (2 d^2)
  double ddot_delta = 0.0;      // var_theory / (log d + log d')
  double vd_coefficient = 0.0;  // ddot_delta / 4
  double cross_term = 0.0;      // 2d int Re[c_d(z) conj(c_1(z^d))]
};

TheoreticalQuantities theoretical_quantities(const SkewFamily& fam);

// Coefficient of |t|^2 in delta_t: ddot_delta / 2.
double delta_coefficient_theory(const SkewFamily& fam, bool include_cross_term = false);

}  // namespace skewdim
