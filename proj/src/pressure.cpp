#include "skewdim/pressure.hpp"

#include "skewdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skewdim {

void BirkhoffSpectrum::add(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "non-finite Birkhoff sum");
  const auto key = static_cast<std::int64_t>(std::floor(x / kWidth));
  const double center = (static_cast<double>(key) + 0.5) * kWidth;
  auto& m = buckets_[key];
  const double u = x - center;
  double p = 1.0;
  for (int j = 0; j < kMoments; ++j) {
    m[static_cast<std::size_t>(j)] += p;
    p *= u;
  }
  min_ = count_ == 0 ? x : std::min(min_, x);
  max_ = count_ == 0 ? x : std::max(max_, x);
  ++count_;
}

void BirkhoffSpectrum::merge(const BirkhoffSpectrum& other) {
  if (other.count_ == 0) return;
  for (const auto& [key, mo] : other.buckets_) {
    auto& m = buckets_[key];
    for (int j = 0; j < kMoments; ++j) m[static_cast<std::size_t>(j)] += mo[static_cast<std::size_t>(j)];
  }
  min_ = count_ == 0 ? other.min_ : std::min(min_, other.min_);
  max_ = count_ == 0 ? other.max_ : std::max(max_, other.max_);
  count_ += other.count_;
}

double BirkhoffSpectrum::log_sum_exp(double s) const {
  if (count_ == 0) fail(ErrorCode::kInvalidArgument, "empty spectrum");
  // Per bucket: exp(s c) * sum_j s^j M_j / j!, with |x - c| <= 2^-11.
  std::vector<double> logs;
  logs.reserve(buckets_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& [key, m] : buckets_) {
    const double center = (static_cast<double>(key) + 0.5) * kWidth;
    double inner = 0.0;
    double coef = 1.0;
    for (int j = 0; j < kMoments; ++j) {
      inner += coef * m[static_cast<std::size_t>(j)];
      coef *= s / (j + 1);
    }
    const double l = s * center + std::log(inner);
    logs.push_back(l);
    top = std::max(top, l);
  }
  NeumaierSum acc;
  for (double l : logs) acc.add(std::exp(l - top));
  return top + std::log(acc.value());
}

std::string method_name(PressureMethod m) {
  return m == PressureMethod::kPeriodic ? "periodic" : "preimage";
}

PressureMethod parse_method(const std::string& name) {
  if (name == "periodic") return PressureMethod::kPeriodic;
  if (name == "preimage") return PressureMethod::kPreimage;
  fail(ErrorCode::kInvalidArgument, "unknown method '" + name + "' (periodic or preimage)");
}

namespace {

BirkhoffSpectrum periodic_spectrum(const SkewFamily& fam, cplx t, int n, const PressureConfig& cfg) {
  const std::uint64_t size = lattice_size(fam, n);
  if (size > cfg.continuation.budget) {
    fail(ErrorCode::kBudgetExceeded, "period-" + std::to_string(n) + " lattice has " +
                                         std::to_string(size) + " points, over budget");
  }
  std::uint64_t bases = 1;
  for (int i = 0; i < n; ++i) bases *= static_cast<std::uint64_t>(fam.d_prime());
  bases -= 1;
  const double shift = -n * std::log(static_cast<double>(fam.d_prime()));
  std::vector<BirkhoffSpectrum> parts(static_cast<std::size_t>(bases));
  ContinuationConfig cont = cfg.continuation;
  parallel_chunks(static_cast<std::size_t>(bases), cfg.threads, [&](std::size_t i) {
    for (const auto& p : continue_fiber_block(fam, n, i, t, cont)) {
      parts[i].add(shift - std::log(std::abs(p.multiplier)));
    }
  });
  BirkhoffSpectrum out;
  for (const auto& p : parts) out.merge(p);
  return out;
}

std::vector<TorusPoint> preimage_basepoints(const SkewFamily& fam, cplx t, const PressureConfig& cfg,
                                            int& period) {
  int k = cfg.basepoint_period;
  if (k < 0) fail(ErrorCode::kInvalidArgument, "basepoint_period must be >= 0");
  if (k == 0) {
    k = 2;
    while (lattice_size(fam, k + 1) <= 64) ++k;
  }
  period = k;
  if (k == 1) {
    // The continued fixed point over z = 1 whose seed is nearest w = 1.
    PeriodicOrbitPoint seed;
    seed.n = 1;
    seed.z = 1.0;
    seed.w = 1.0;
    seed.continued_to_t = 0.0;
    seed.converged = true;
    const auto p = continue_in_t(fam, seed, t, cfg.continuation);
    return {{p.z, p.w}};
  }
  if (lattice_size(fam, k) > 4096) fail(ErrorCode::kBudgetExceeded, "too many preimage basepoints");
  std::vector<TorusPoint> out;
  for (const auto& p : continue_lattice(fam, k, t, cfg.continuation)) out.push_back({p.z, p.w});
  return out;
}

// Depth-first walk of the inverse-branch tree below one basepoint, adding
// S_m phi of every node at depth m in [n_lo, n_hi] to spectra[m - n_lo].
class PreimageTree {
 public:
  PreimageTree(const SkewFamily& fam, cplx t, int n_lo, int n_hi)
      : fam_(fam), t_(t), n_lo_(n_lo), n_hi_(n_hi), d_(fam.d()), dp_(fam.d_prime()),
        log_dp_(std::log(static_cast<double>(fam.d_prime()))) {
    scratch_.resize(static_cast<std::size_t>(n_hi + 1));
    cvals_.resize(static_cast<std::size_t>(n_hi + 1) * static_cast<std::size_t>(d_ * dp_));
  }

  void walk(const TorusPoint& root, std::vector<BirkhoffSpectrum>& spectra) {
    visit(std::arg(root.z), root.w, 0.0, 0, spectra);
  }

 private:
  void visit(double theta, cplx w, double acc, int depth, std::vector<BirkhoffSpectrum>& spectra) {
    auto& roots = scratch_[static_cast<std::size_t>(depth)];
    cplx* cv = cvals_.data() + static_cast<std::ptrdiff_t>(depth) * d_ * dp_;
    for (int m = 0; m < dp_; ++m) {
      const double th = (theta + kTwoPi * m) / dp_;
      const cplx z = std::polar(1.0, th);
      cplx* c = cv + static_cast<std::ptrdiff_t>(m) * d_;
      for (int k = 1; k <= d_; ++k) c[k - 1] = fam_.c(k)(z);
      roots.clear();
      fiber_roots(std::span<const cplx>(c, static_cast<std::size_t>(d_)), t_, w, roots);
      for (const cplx& y : roots) {
        // d/dw of the fiber polynomial over the preimage base point.
        cplx q{1.0, 0.0};
        cplx dq{0.0, 0.0};
        for (int k = 0; k < d_; ++k) {
          dq = dq * y + q;
          q = q * y + t_ * c[k];
        }
        const double a = std::abs(dq);
        if (a < 1e-30) fail(ErrorCode::kCriticalPoint, "preimage tree hit a fiber critical point");
        const double next = acc - log_dp_ - std::log(a);
        const int dn = depth + 1;
        if (dn >= n_lo_) spectra[static_cast<std::size_t>(dn - n_lo_)].add(next);
        // Children use the scratch slots of the next depth, so `roots`
        // stays valid across the recursion.
        if (dn < n_hi_) visit(th, y, next, dn, spectra);
      }
    }
  }

  const SkewFamily& fam_;
  cplx t_;
  int n_lo_;
  int n_hi_;
  int d_;
  int dp_;
  double log_dp_;
  std::vector<std::vector<cplx>> scratch_;
  std::vector<cplx> cvals_;
};

}  // namespace

PartitionLevels::PartitionLevels(const SkewFamily& fam, cplx t, int n_lo, int n_hi,
                                 const PressureConfig& cfg)
    : d_(fam.d()), d_prime_(fam.d_prime()), n_lo_(n_lo), n_hi_(n_hi), method_(cfg.method) {
  if (n_lo < 1 || n_hi < n_lo) fail(ErrorCode::kInvalidArgument, "invalid level range");
  spectra_.resize(static_cast<std::size_t>(n_hi - n_lo + 1));
  if (method_ == PressureMethod::kPeriodic) {
    for (int n = n_lo; n <= n_hi; ++n) {
      spectra_[static_cast<std::size_t>(n - n_lo)] = periodic_spectrum(fam, t, n, cfg);
    }
    return;
  }
  const auto roots = preimage_basepoints(fam, t, cfg, basepoint_period_);
  basepoints_ = roots.size();
  std::vector<std::vector<BirkhoffSpectrum>> parts(roots.size());
  parallel_chunks(roots.size(), cfg.threads, [&](std::size_t b) {
    parts[b].resize(spectra_.size());
    PreimageTree tree(fam, t, n_lo, n_hi);
    tree.walk(roots[b], parts[b]);
  });
  for (const auto& part : parts) {
    for (std::size_t l = 0; l < spectra_.size(); ++l) spectra_[l].merge(part[l]);
  }
}

const BirkhoffSpectrum& PartitionLevels::spectrum(int n) const {
  if (n < n_lo_ || n > n_hi_) fail(ErrorCode::kInvalidArgument, "level outside the computed range");
  return spectra_[static_cast<std::size_t>(n - n_lo_)];
}

double PartitionLevels::log_Z(int n, double s) const {
  const double l = spectrum(n).log_sum_exp(s);
  if (method_ == PressureMethod::kPreimage) return l - std::log(static_cast<double>(basepoints_));
  return l;
}

double PartitionLevels::log_Z_normalized(int n, double s) const {
  const double l = log_Z(n, s);
  if (method_ == PressureMethod::kPreimage) return l;
  const double a = std::pow(static_cast<double>(d_prime_), -n);
  const double b = std::pow(static_cast<double>(d_), -n);
  return l - std::log1p(-a) - std::log1p(-b);
}

double PartitionLevels::pressure(int n, double s) const {
  return log_Z_normalized(n, s) - log_Z_normalized(n - 1, s);
}

double log_partition(const SkewFamily& fam, cplx t, double s, int n, const PressureConfig& cfg) {
  const PartitionLevels levels(fam, t, n, n, cfg);
  return levels.log_Z(n, s);
}

PressureEstimate pressure_estimate(const SkewFamily& fam, cplx t, double s, int n_max,
                                   const PressureConfig& cfg) {
  if (n_max < 3) fail(ErrorCode::kInvalidArgument, "n_max must be >= 3");
  const PartitionLevels levels(fam, t, n_max - 2, n_max, cfg);
  PressureEstimate est;
  est.s = s;
  est.t = t;
  est.method = cfg.method;
  est.basepoints = levels.basepoints();
  for (int n = n_max - 2; n <= n_max; ++n) {
    est.log_Z.push_back({n, levels.log_Z(n, s), levels.log_Z_normalized(n, s)});
  }
  est.P = levels.pressure(n_max, s);
  est.err_proxy = std::abs(est.P - levels.pressure(n_max - 1, s));
  return est;
}

double pressure_zero(const PartitionLevels& levels, int n, double tol, int* iterations) {
  auto P = [&](double s) { return levels.pressure(n, s); };
  double lo = 0.0;
  double hi = 2.0;
  const double p_lo = P(lo);
  const double p_hi = P(hi);
  if (!(p_lo > 0.0 && p_hi < 0.0)) {
    fail(ErrorCode::kNoBracket, "pressure does not change sign on [0, 2]");
  }
  double s0 = lo;
  double f0 = p_lo;
  double s1 = 1.0;
  double f1 = P(s1);
  int it = 0;
  while (std::abs(f1) >= tol && it < 200) {
    ++it;
    if (f1 > 0.0) {
      lo = s1;
    } else {
      hi = s1;
    }
    double next = s1 - f1 * (s1 - s0) / (f1 - f0);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    s0 = s1;
    f0 = f1;
    s1 = next;
    f1 = P(s1);
    if (hi - lo < 1e-15) break;
  }
  if (iterations != nullptr) *iterations = it;
  return s1;
}

DeltaResult solve_delta(const SkewFamily& fam, cplx t, int n_max, double tol, const PressureConfig& cfg) {
  if (n_max < 3) fail(ErrorCode::kInvalidArgument, "n_max must be >= 3");
  if (!(tol > 0.0)) fail(ErrorCode::kInvalidArgument, "tol must be positive");
  const PartitionLevels levels(fam, t, n_max - 2, n_max, cfg);
  DeltaResult r;
  r.t = t;
  r.n_max = n_max;
  r.method = cfg.method;
  r.delta = pressure_zero(levels, n_max, tol, &r.iterations);
  const double previous = pressure_zero(levels, n_max - 1, tol);
  r.err_proxy = std::abs(r.delta - previous);
  r.vd = r.delta / 2.0;
  r.basepoints = levels.basepoints();
  r.basepoint_period = levels.basepoint_period();
  return r;
}

}  // namespace skewdim
