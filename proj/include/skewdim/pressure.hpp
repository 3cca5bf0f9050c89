#pragma once

#include "skewdim/periodic.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace skewdim {

// Multiset of Birkhoff sums x = S_n phi, stored as per-bucket moments so that
// log sum exp(s x) can be evaluated for any s without keeping every value.
class BirkhoffSpectrum {
 public:
  void add(double x);
  void merge(const BirkhoffSpectrum& other);
  // log sum_i exp(s x_i), max-shifted. Requires a nonempty spectrum.
  double log_sum_exp(double s) const;
  std::uint64_t count() const { return count_; }
  double min() const { return min_; }
  double max() const { return max_; }

 private:
  static constexpr int kMoments = 8;
  static constexpr double kWidth = 1.0 / 1024.0;
  std::map<std::int64_t, std::array<double, kMoments>> buckets_;
  std::uint64_t count_ = 0;
  double min_ = 0.0;
  double max_ = 0.0;
};

enum class PressureMethod { kPeriodic, kPreimage };

std::string method_name(PressureMethod m);
PressureMethod parse_method(const std::string& name);

struct PressureConfig {
  PressureMethod method = PressureMethod::kPeriodic;
  ContinuationConfig continuation;
  // Period of the continued lattice used as preimage basepoints.
  // 0 picks the largest k >= 2 with at most 64 points; 1 is the single
  // continued fixed point nearest (1, 1).
  int basepoint_period = 0;
  unsigned threads = 0;
};

// Spectra of S_n phi_t for a range of levels, shared by every s.
class PartitionLevels {
 public:
  PartitionLevels(const SkewFamily& fam, cplx t, int n_lo, int n_hi, const PressureConfig& cfg);

  int n_lo() const { return n_lo_; }
  int n_hi() const { return n_hi_; }
  PressureMethod method() const { return method_; }
  std::size_t basepoints() const { return basepoints_; }
  int basepoint_period() const { return basepoint_period_; }
  const BirkhoffSpectrum& spectrum(int n) const;

  // Raw log partition sum: plain periodic sum, or the basepoint average of
  // the preimage sums.
  double log_Z(int n, double s) const;
  // log_Z with the periodic sum divided by (1 - d'^-n)(1 - d^-n).
  double log_Z_normalized(int n, double s) const;
  // Difference estimator log Z_n - log Z_{n-1} (normalized).
  double pressure(int n, double s) const;

 private:
  int d_;
  int d_prime_;
  int n_lo_;
  int n_hi_;
  PressureMethod method_;
  std::size_t basepoints_ = 1;
  int basepoint_period_ = 0;
  std::vector<BirkhoffSpectrum> spectra_;
};

double log_partition(const SkewFamily& fam, cplx t, double s, int n, const PressureConfig& cfg = {});

struct LogZEntry {
  int n = 0;
  double raw = 0.0;
  double normalized = 0.0;
};

struct PressureEstimate {
  double s = 0.0;
  cplx t;
  PressureMethod method = PressureMethod::kPeriodic;
  std::vector<LogZEntry> log_Z;
  double P = 0.0;
  double err_proxy = 0.0;
  std::size_t basepoints = 1;
};

PressureEstimate pressure_estimate(const SkewFamily& fam, cplx t, double s, int n_max,
                                   const PressureConfig& cfg = {});

struct DeltaResult {
  double delta = 0.0;
  cplx t;
  int n_max = 0;
  PressureMethod method = PressureMethod::kPeriodic;
  double err_proxy = 0.0;
  double vd = 0.0;
  int iterations = 0;
  std::size_t basepoints = 1;  // preimage method only
  int basepoint_period = 0;
};

// Zero of s -> P(n, s) on [0, 2]; secant from s = 1 with a bisection guard.
double pressure_zero(const PartitionLevels& levels, int n, double tol, int* iterations = nullptr);

DeltaResult solve_delta(const SkewFamily& fam, cplx t, int n_max, double tol = 1e-10,
                        const PressureConfig& cfg = {});

}  // namespace skewdim
