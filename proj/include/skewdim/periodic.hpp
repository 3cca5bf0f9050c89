#pragma once

#include "skewdim/family.hpp"

#include <cstdint>
#include <vector>

namespace skewdim {

struct PeriodicOrbitPoint {
  int n = 0;
  std::uint64_t base_index = 0;   // z = exp(2 pi i base_index / (d'^n - 1))
  std::uint64_t fiber_index = 0;  // t = 0 seed w = exp(2 pi i fiber_index / (d^n - 1))
  cplx z;
  cplx w;
  cplx continued_to_t;
  bool converged = false;
  cplx multiplier;  // d/dw of the n-fold fiber composition
};

struct ContinuationConfig {
  int steps = 0;  // 0: max(5, ceil(|t| / 0.01))
  double newton_tol = 1e-12;
  int max_newton = 30;
  double min_multiplier = 1.01;
  int max_halvings = 3;
  std::uint64_t budget = std::uint64_t{1} << 25;
  unsigned threads = 0;

  int resolved_steps(cplx t) const;
};

// Number of t = 0 lattice points of period n: (d'^n - 1)(d^n - 1).
std::uint64_t lattice_size(const SkewFamily& fam, int n);

std::vector<PeriodicOrbitPoint> enumerate_t0(const SkewFamily& fam, int n,
                                             std::uint64_t budget = std::uint64_t{1} << 25);

// Follows Q^{(n)}_{z,t}(w) = w from the point's parameter to t_target.
PeriodicOrbitPoint continue_in_t(const SkewFamily& fam, const PeriodicOrbitPoint& point,
                                 cplx t_target, const ContinuationConfig& cfg = {});

// All lattice points with base index `base_index`, continued to t, in fiber order.
std::vector<PeriodicOrbitPoint> continue_fiber_block(const SkewFamily& fam, int n,
                                                     std::uint64_t base_index, cplx t,
                                                     const ContinuationConfig& cfg = {});

// The full lattice continued to t, in lattice order.
std::vector<PeriodicOrbitPoint> continue_lattice(const SkewFamily& fam, int n, cplx t,
                                                 const ContinuationConfig& cfg = {});

// The d' * d points mapped to p by F_t, base roots outermost.
std::vector<TorusPoint> preimages(const SkewFamily& fam, cplx t, const TorusPoint& p);

// Roots of sum_j a_j w^j (ascending powers), repeated by multiplicity.
std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs);

}  // namespace skewdim

namespace skewdim {

// Solutions w of w^d + t sum_k c_k w^{d-k} = target, with c_values = c_k(z).
// Appends to `out`.
void fiber_roots(std::span<const cplx> c_values, cplx t, cplx target, std::vector<cplx>& out);

}  // namespace skewdim
