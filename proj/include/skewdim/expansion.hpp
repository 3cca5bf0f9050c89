#pragma once

#include "skewdim/deformation.hpp"
#include "skewdim/pressure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace skewdim {

struct HyperbolicityConfig {
  int j_samples = 256;
  int depth = 40;
  int z_samples = 32;
  int critical_iters = 200;
  std::uint64_t seed = 0;
  double min_derivative = 1.05;
};

struct HyperbolicityDiagnostic {
  double min_vertical_derivative = 0.0;  // over a backward-iteration sample of J
  double critical_orbit_max_modulus = 0.0;
  bool fiberwise_connected = false;  // every sampled critical orbit stayed bounded
  bool verdict = false;
};

// Conservative check: false negatives are possible, a true verdict is not a proof.
HyperbolicityDiagnostic hyperbolicity_heuristic(const SkewFamily& fam, cplx t,
                                                const HyperbolicityConfig& cfg = {});

struct SweepEntry {
  cplx t;
  bool ok = false;
  DeltaResult result;
  HyperbolicityDiagnostic hyperbolicity;
  std::string error_code;
  std::string error_message;
};

struct SweepConfig {
  int n_max = 9;
  double tol = 1e-10;
  PressureConfig pressure;
  HyperbolicityConfig hyperbolicity;
};

// One independent delta solve per t; failures are recorded and the sweep continues.
std::vector<SweepEntry> sweep_delta(const SkewFamily& fam, const std::vector<cplx>& t_grid,
                                    const SweepConfig& cfg);

struct FitResult {
  double a_fit = 0.0;
  double b_cubic = 0.0;  // |t|^3 coefficient, zero without the nuisance term
  double residual = 0.0;  // root mean square
  double a_stderr = 0.0;
  bool cubic = false;
  int points = 0;
};

// Least squares of delta - 1 against |t|^2, optionally with a |t|^3 term.
FitResult fit_coefficient(const std::vector<cplx>& t_grid, const std::vector<double>& deltas,
                          bool cubic = false);

struct ExpansionConfig {
  std::vector<cplx> t_grid{0.02, 0.04, 0.06, 0.08, 0.10};
  SweepConfig sweep;
  double tolerance = 0.15;
  bool cubic = true;
  // Energy and variance cross-checks (only when d' = d).
  bool diagnostics = true;
  EnergyConfig energy;
  VarianceConfig variance;
};

struct ExpansionReport {
  std::vector<SweepEntry> entries;
  bool fit_ok = false;
  std::string fit_error;
  FitResult fit;
  FitResult fit_quadratic;
  double a_theory = 0.0;
  double a_theory_with_cross = 0.0;
  double vd_coefficient_fit = 0.0;
  double vd_coefficient_theory = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool verdict = false;
  TheoreticalQuantities theory;
  std::optional<EnergyEstimate> energy;
  std::optional<VarianceEstimate> variance;
  std::string diagnostics_error;
};

ExpansionReport verify_expansion(const SkewFamily& fam, const ExpansionConfig& cfg);

}  // namespace skewdim
