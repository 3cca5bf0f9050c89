#pragma once

#include "skewdim/family.hpp"

namespace skewdim {

struct GreenParams {
  double escape_radius = 1e6;
  int max_iters = 200;
  double tol = 1e-12;

  void validate() const;
};

// Radius beyond which every fiber orbit escapes: 4 (1 + sum_k sup|c_k| |t|).
double absorbing_radius(const SkewFamily& fam, cplx t);

// Fiberwise Green function G_z(w). Zero for orbits that stay inside the
// absorbing radius for max_iters steps.
double green(const SkewFamily& fam, cplx t, const TorusPoint& p, const GreenParams& params = {});

// Boettcher coordinate phi_z(w), tangent to the identity at infinity.
cplx boettcher_coord(const SkewFamily& fam, cplx t, const TorusPoint& p,
                     const GreenParams& params = {});

// H_t(z, omega) = phi_{t,z}^{-1}(omega); the identity at t = 0.
cplx conjugacy_H(const SkewFamily& fam, cplx t, cplx z, cplx omega,
                 const GreenParams& params = {});

}  // namespace skewdim
