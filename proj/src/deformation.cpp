#include "skewdim/deformation.hpp"

#include "skewdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace skewdim {

namespace {

void require_equal_degrees(const SkewFamily& fam) {
  if (fam.d() != fam.d_prime()) {
    fail(ErrorCode::kUnsupportedBaseDegree, "this operation needs d_prime == d");
  }
}

// Coefficient values c_k(z^{d^n}) for n = 0..levels-1, row-major by n.
std::vector<cplx> coefficient_table(const SkewFamily& fam, cplx z, int levels) {
  const int d = fam.d();
  std::vector<cplx> table(static_cast<std::size_t>(levels * d));
  cplx zn = unit(z);
  for (int n = 0; n < levels; ++n) {
    for (int k = 1; k <= d; ++k) table[static_cast<std::size_t>(n * d + k - 1)] = fam.c(k)(zn);
    zn = unit(std::pow(zn, d));
  }
  return table;
}

// w^{-d^n} for n = 0..levels-1, modulus and phase kept apart so points on
// the unit circle do not drift.
std::vector<cplx> inverse_powers(cplx w, int d, int levels) {
  std::vector<cplx> out(static_cast<std::size_t>(levels));
  // Callers guarantee |w| >= 1 up to rounding; a rounding deficit would be
  // amplified by d^n.
  const double log_r = std::max(0.0, std::log(std::abs(w)));
  cplx phase = std::conj(unit(w));
  double expo = 1.0;
  for (int n = 0; n < levels; ++n) {
    const double lm = -expo * log_r;
    out[static_cast<std::size_t>(n)] = lm < -745.0 ? cplx{0.0, 0.0} : std::exp(lm) * phase;
    phase = unit(std::pow(phase, d));
    expo *= d;
  }
  return out;
}

}  // namespace

SeriesValue v_series(const SkewFamily& fam, cplx z, cplx w, const SeriesTruncation& trunc) {
  require_equal_degrees(fam);
  if (trunc.N < 1) fail(ErrorCode::kInvalidArgument, "truncation N must be >= 1");
  if (std::abs(w) < 1.0 - 1e-12) fail(ErrorCode::kInvalidArgument, "v_series needs |w| >= 1");
  const int d = fam.d();
  const int levels = trunc.N + 1;
  const auto c = coefficient_table(fam, z, levels);
  const auto u = inverse_powers(w, d, levels);
  cplx sum{0.0, 0.0};
  double weight = 1.0;
  for (int n = 0; n < levels; ++n) {
    const cplx un = u[static_cast<std::size_t>(n)];
    cplx pw{1.0, 0.0};
    cplx level{0.0, 0.0};
    for (int k = 1; k <= d; ++k) {
      pw *= un;
      level += c[static_cast<std::size_t>(n * d + k - 1)] * pw;
    }
    sum += weight * level;
    weight /= d;
  }
  SeriesValue out;
  out.value = -(w / static_cast<double>(d)) * sum;
  out.tail_bound = fam.coefficient_bound() / d * std::pow(static_cast<double>(d), -trunc.N) /
                   (1.0 - 1.0 / d) * std::abs(w);
  return out;
}

cplx dw_v_series(const SkewFamily& fam, cplx z, cplx w) {
  require_equal_degrees(fam);
  const double r = std::abs(w);
  if (r <= 1.0 + 1e-6) fail(ErrorCode::kOnCircle, "dw_v_series needs |w| > 1");
  const int d = fam.d();
  // Smallest level with |w|^{-d^n} below 1e-17.
  const double need = 39.2 / std::log(r);
  const int levels = static_cast<int>(std::ceil(std::log(std::max(need, 1.0)) / std::log(d))) + 2;
  const auto c = coefficient_table(fam, z, levels);
  const auto u = inverse_powers(w, d, levels);
  cplx sum{0.0, 0.0};
  double weight = 1.0;
  for (int n = 0; n < levels; ++n) {
    const cplx un = u[static_cast<std::size_t>(n)];
    cplx pw{1.0, 0.0};
    for (int k = 1; k <= d; ++k) {
      pw *= un;
      sum += (k - weight) * c[static_cast<std::size_t>(n * d + k - 1)] * pw;
    }
    weight /= d;
  }
  return sum / static_cast<double>(d);
}

double dot_phi0(const SkewFamily& fam, cplx z, cplx w, const SeriesTruncation& trunc) {
  const int d = fam.d();
  const cplx v = v_series(fam, z, w, trunc).value;
  const cplx zu = unit(z);
  const cplx inv = 1.0 / w;
  cplx acc{0.0, 0.0};
  cplx pw{1.0, 0.0};
  for (int k = 1; k < d; ++k) {
    pw *= inv;
    acc += static_cast<double>(d - k) * fam.c(k)(zu) * pw;
  }
  return -(acc / static_cast<double>(d) + static_cast<double>(d - 1) * v / w).real();
}

double coboundary_residual(const SkewFamily& fam, cplx z, cplx w) {
  require_equal_degrees(fam);
  const int d = fam.d();
  const double g0 = dw_v_series(fam, z, w).real();
  const double g1 = dw_v_series(fam, unit(std::pow(unit(z), d)), std::pow(w, d)).real();
  return std::abs(dot_phi0(fam, z, w) - (g0 - g1));
}

double energy_closed_form(const SkewFamily& fam, bool include_cross_term) {
  require_equal_degrees(fam);
  const auto q = theoretical_quantities(fam);
  const double d = fam.d();
  return (q.S + (include_cross_term ? q.cross_term : 0.0)) / (d * d * std::log(d));
}

EnergyEstimate energy_quadrature(const SkewFamily& fam, const EnergyConfig& cfg) {
  require_equal_degrees(fam);
  if (cfg.m_min < 4 || cfg.m_max > 40 || cfg.m_max - cfg.m_min < 1) {
    fail(ErrorCode::kInvalidArgument, "m_range must lie within [4, 40] with at least two levels");
  }
  if (cfg.z_samples < 100) fail(ErrorCode::kInvalidArgument, "z_samples must be >= 100");

  const int d = fam.d();
  const double log_d = std::log(static_cast<double>(d));
  // r^{-2 d^n} < 1e-16 once d^n > 18.43 / (r - 1).
  auto level_cutoff = [&](int m) {
    return static_cast<int>(std::ceil((m * std::log(2.0) + std::log(18.43)) / log_d)) + 1;
  };
  const int levels = level_cutoff(cfg.m_max) + 1;

  std::vector<int> ms;
  std::vector<double> inv_m;
  for (int m = cfg.m_min; m <= cfg.m_max; ++m) {
    ms.push_back(m);
    inv_m.push_back(1.0 / m);
  }
  const Eigen::MatrixXd op = least_squares_operator(affine_design(inv_m));
  const std::size_t nm = ms.size();

  const auto ns = static_cast<std::size_t>(cfg.z_samples);
  std::vector<double> intercepts(ns);
  std::vector<double> energies(ns * nm);
  const CounterRng rng(cfg.seed);
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (ns + kChunk - 1) / kChunk;
  parallel_chunks(chunks, cfg.threads, [&](std::size_t chunk) {
    std::vector<std::pair<std::uint64_t, cplx>> groups;
    for (std::size_t i = chunk * kChunk; i < std::min(ns, (chunk + 1) * kChunk); ++i) {
      const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
      const auto c = coefficient_table(fam, z, levels);
      // Parseval coefficients of dw v on circles, grouped by exponent k d^n.
      groups.clear();
      std::uint64_t dn = 1;
      double weight = 1.0;
      for (int n = 0; n < levels; ++n) {
        for (int k = 1; k <= d; ++k) {
          groups.emplace_back(static_cast<std::uint64_t>(k) * dn,
                              (k - weight) / d * c[static_cast<std::size_t>(n * d + k - 1)]);
        }
        dn *= static_cast<std::uint64_t>(d);
        weight /= d;
      }
      std::stable_sort(groups.begin(), groups.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t out = 0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (out > 0 && groups[out - 1].first == groups[g].first) {
          groups[out - 1].second += groups[g].second;
        } else {
          groups[out++] = groups[g];
        }
      }
      groups.resize(out);

      Eigen::VectorXd y(static_cast<Eigen::Index>(nm));
      for (std::size_t j = 0; j < nm; ++j) {
        const double log_r = std::log1p(std::ldexp(1.0, -ms[j]));
        NeumaierSum e;
        for (const auto& [expo, coef] : groups) {
          e.add(std::norm(coef) * std::exp(-2.0 * static_cast<double>(expo) * log_r));
        }
        energies[i * nm + j] = e.value();
        y(static_cast<Eigen::Index>(j)) = e.value() / (ms[j] * std::log(2.0));
      }
      intercepts[i] = op.row(0).dot(y);
    }
  });

  EnergyEstimate est;
  const SampleMean sm = sample_mean(intercepts);
  est.I_est = sm.mean;
  est.std_error = sm.std_error;
  est.z_samples = cfg.z_samples;
  for (std::size_t j = 0; j < nm; ++j) {
    NeumaierSum e;
    for (std::size_t i = 0; i < ns; ++i) e.add(energies[i * nm + j]);
    est.levels.push_back({ms[j], 1.0 + std::ldexp(1.0, -ms[j]), e.value() / static_cast<double>(ns),
                          level_cutoff(ms[j])});
  }
  return est;
}

namespace {

// Base-d digit stream of a uniform angle: the orbit under multiplication by d
// is a shift of the digits, so every orbit point is exact.
class DigitOrbit {
 public:
  DigitOrbit(const CounterRng& rng, std::uint64_t sample, std::uint64_t stream, int d, int length)
      : d_(d) {
    window_ = static_cast<int>(std::ceil(56.0 / std::log2(static_cast<double>(d))));
    digits_.resize(static_cast<std::size_t>(length + window_));
    for (std::size_t i = 0; i < digits_.size(); ++i) {
      digits_[i] = static_cast<int>(rng.bits(sample, 2 * i + stream) % static_cast<std::uint64_t>(d));
    }
  }
  // Angle (in turns) of the j-th orbit point.
  double turns(int j) const {
    double acc = 0.0;
    for (int i = window_ - 1; i >= 0; --i) {
      acc = (acc + digits_[static_cast<std::size_t>(j + i)]) / d_;
    }
    return acc;
  }

 private:
  int d_;
  int window_;
  std::vector<int> digits_;
};

}  // namespace

VarianceEstimate variance_mc(const SkewFamily& fam, const VarianceConfig& cfg) {
  require_equal_degrees(fam);
  if (cfg.n_values.size() < 2) fail(ErrorCode::kInvalidArgument, "variance needs at least two n values");
  for (int n : cfg.n_values) {
    if (n < 10) fail(ErrorCode::kInvalidArgument, "variance n values must be >= 10");
  }
  if (cfg.samples < 10000) fail(ErrorCode::kInvalidArgument, "variance needs >= 1e4 samples");
  if (cfg.trunc.N < 1) fail(ErrorCode::kInvalidArgument, "truncation N must be >= 1");

  const int d = fam.d();
  const int n_top = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
  const int length = n_top + cfg.trunc.N + 1;
  std::vector<double> inv_n;
  for (int n : cfg.n_values) inv_n.push_back(1.0 / n);
  const Eigen::MatrixXd op = least_squares_operator(affine_design(inv_n));
  const std::size_t nn = cfg.n_values.size();

  const auto ns = static_cast<std::size_t>(cfg.samples);
  std::vector<double> intercepts(ns);
  std::vector<double> per_level(ns * nn);
  const CounterRng rng(cfg.seed);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (ns + kChunk - 1) / kChunk;
  const bool trivial = fam.is_trivial();

  parallel_chunks(chunks, cfg.threads, [&](std::size_t chunk) {
    std::vector<cplx> a(static_cast<std::size_t>(length));
    std::vector<cplx> b(static_cast<std::size_t>(length));
    std::vector<double> phi(static_cast<std::size_t>(n_top));
    for (std::size_t i = chunk * kChunk; i < std::min(ns, (chunk + 1) * kChunk); ++i) {
      if (!trivial) {
        const DigitOrbit zo(rng, i, 0, d, length);
        const DigitOrbit wo(rng, i, 1, d, length);
        for (int j = 0; j < length; ++j) {
          const cplx z = std::polar(1.0, kTwoPi * zo.turns(j));
          const cplx winv = std::polar(1.0, -kTwoPi * wo.turns(j));
          cplx pw{1.0, 0.0};
          cplx aj{0.0, 0.0};
          cplx bj{0.0, 0.0};
          for (int k = 1; k <= d; ++k) {
            pw *= winv;
            const cplx term = fam.c(k)(z) * pw;
            aj += term;
            bj += static_cast<double>(d - k) * term;
          }
          a[static_cast<std::size_t>(j)] = aj;
          b[static_cast<std::size_t>(j)] = bj / static_cast<double>(d);
        }
        // B_j = sum_n d^{-n} a_{j+n}; v_j / w_j = -B_j / d.
        cplx B{0.0, 0.0};
        for (int j = length - 1; j >= 0; --j) {
          B = a[static_cast<std::size_t>(j)] + B / static_cast<double>(d);
          if (j < n_top) {
            phi[static_cast<std::size_t>(j)] =
                -(b[static_cast<std::size_t>(j)] - static_cast<double>(d - 1) / d * B).real();
          }
        }
      }
      Eigen::VectorXd y(static_cast<Eigen::Index>(nn));
      for (std::size_t l = 0; l < nn; ++l) {
        const int n = cfg.n_values[l];
        double s = 0.0;
        if (!trivial) {
          for (int j = 0; j < n; ++j) s += phi[static_cast<std::size_t>(j)];
        }
        const double v = s * s / n;
        per_level[i * nn + l] = v;
        y(static_cast<Eigen::Index>(l)) = v;
      }
      intercepts[i] = op.row(0).dot(y);
    }
  });

  VarianceEstimate est;
  const SampleMean sm = sample_mean(intercepts);
  est.var_est = std::max(0.0, sm.mean);
  est.std_error = sm.std_error;
  est.samples = cfg.samples;
  for (std::size_t l = 0; l < nn; ++l) {
    std::vector<double> col(ns);
    for (std::size_t i = 0; i < ns; ++i) col[i] = per_level[i * nn + l];
    const SampleMean lm = sample_mean(col);
    est.levels.push_back({cfg.n_values[l], lm.mean, lm.std_error});
  }
  return est;
}

SampleMean dot_phi0_mean(const SkewFamily& fam, int samples, std::uint64_t seed, unsigned threads) {
  require_equal_degrees(fam);
  if (samples < 2) fail(ErrorCode::kInvalidArgument, "need at least two samples");
  const auto ns = static_cast<std::size_t>(samples);
  std::vector<double> values(ns);
  const CounterRng rng(seed);
  constexpr std::size_t kChunk = 1024;
  parallel_chunks((ns + kChunk - 1) / kChunk, threads, [&](std::size_t chunk) {
    for (std::size_t i = chunk * kChunk; i < std::min(ns, (chunk + 1) * kChunk); ++i) {
      const cplx z = std::polar(1.0, kTwoPi * rng.uniform(i, 0));
      const cplx w = std::polar(1.0, kTwoPi * rng.uniform(i, 1));
      values[i] = dot_phi0(fam, z, w);
    }
  });
  return sample_mean(values);
}

}  // namespace skewdim
