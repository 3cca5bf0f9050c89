#pragma once

#include "skewdim/family.hpp"

#include <cstdint>
#include <vector>

namespace skewdim {

struct SeriesTruncation {
  int N = 60;  // retained n-levels are 0..N
};

struct SeriesValue {
  cplx value;
  double tail_bound = 0.0;
};

// Infinitesimal conjugacy v = dH_t/dt at t = 0 on |w| >= 1 (needs d' = d).
SeriesValue v_series(const SkewFamily& fam, cplx z, cplx w, const SeriesTruncation& trunc = {});

// d/dw of v for |w| > 1. The cutoff level is chosen from |w|.
cplx dw_v_series(const SkewFamily& fam, cplx z, cplx w);

// Derivative at t = 0 of the pulled-back potential, |w| >= 1.
double dot_phi0(const SkewFamily& fam, cplx z, cplx w, const SeriesTruncation& trunc = {});

// |dot_phi0 - (g - g o F_0)| with g = Re dw_v_series.
double coboundary_residual(const SkewFamily& fam, cplx z, cplx w);

// S / (d^2 log d), optionally with the collision cross term added to S.
double energy_closed_form(const SkewFamily& fam, bool include_cross_term);

struct EnergyConfig {
  int m_min = 12;
  int m_max = 20;
  int z_samples = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct EnergyLevel {
  int m = 0;
  double r = 0.0;  // 1 + 2^-m
  double E = 0.0;  // sample mean of the circle energy at radius r
  int N = 0;       // last series level that matters at this radius
};

struct EnergyEstimate {
  double I_est = 0.0;
  double std_error = 0.0;
  std::vector<EnergyLevel> levels;
  int z_samples = 0;
};

// Asymptotic energy of dw v: Parseval on each circle |w| = r_m, Monte Carlo
// over z, then the intercept of E(r_m)/|log(r_m - 1)| = I + C/m.
EnergyEstimate energy_quadrature(const SkewFamily& fam, const EnergyConfig& cfg);

struct VarianceConfig {
  std::vector<int> n_values{20, 40};
  int samples = 100000;
  std::uint64_t seed = 0;
  SeriesTruncation trunc;
  unsigned threads = 0;
};

struct VarianceLevel {
  int n = 0;
  double mean = 0.0;  // sample mean of (S_n dot_phi0)^2 / n
  double std_error = 0.0;
};

struct VarianceEstimate {
  double var_est = 0.0;
  double std_error = 0.0;
  std::vector<VarianceLevel> levels;
  int samples = 0;
};

// Asymptotic variance of dot_phi0 under Lebesgue measure on the torus, as the
// intercept of var_n = Var + C/n over cfg.n_values.
VarianceEstimate variance_mc(const SkewFamily& fam, const VarianceConfig& cfg);

// Monte Carlo mean of dot_phi0 over uniform torus samples.
SampleMean dot_phi0_mean(const SkewFamily& fam, int samples, std::uint64_t seed, unsigned threads = 0);

}  // namespace skewdim
