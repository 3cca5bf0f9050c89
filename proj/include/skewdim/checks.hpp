#pragma once

#include "skewdim/family.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace skewdim {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct CheckSuiteConfig {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  // Largest lattice used for pressure-level checks.
  std::uint64_t pressure_lattice_limit = 300000;
};

// Parameter used by the suite: 0.05 / max(1, sum_k sup|c_k|).
cplx check_parameter(const SkewFamily& fam);

// Every module invariant, evaluated on `fam`.
std::vector<CheckResult> run_invariant_suite(const SkewFamily& fam, const CheckSuiteConfig& cfg);

}  // namespace skewdim
