#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace skewdim {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline cplx unit(cplx z) {
  const double r = std::abs(z);
  return r > 0.0 ? z / r : cplx{1.0, 0.0};
}

// exp(2 pi i * num / den) without forming the angle from a large product.
inline cplx root_of_unity(std::uint64_t num, std::uint64_t den) {
  const double frac = static_cast<double>(num % den) / static_cast<double>(den);
  return std::polar(1.0, kTwoPi * frac);
}

// log(1 + x) for complex x, accurate when |x| is tiny.
inline cplx clog1p(cplx x) {
  if (std::abs(x) < 1e-5) {
    return x * (1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x)));
  }
  return std::log(1.0 + x);
}

// Neumaier's variant of compensated summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const NeumaierSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Counter-based generator: the k-th draw of sample i under a seed is a pure
// function of (seed, i, k), so Monte Carlo results do not depend on how the
// samples are split across workers.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t sample, std::uint64_t draw) const {
    return mix(mix(seed_ ^ 0x6a09e667f3bcc909ULL) + mix(sample) * 0x9e3779b97f4a7c15ULL + draw);
  }
  // Uniform in [0, 1).
  double uniform(std::uint64_t sample, std::uint64_t draw) const {
    return static_cast<double>(bits(sample, draw) >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  std::uint64_t seed_;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(chunk) for chunk in [0, chunks) on up to `threads` workers. Callers
// store per-chunk results and reduce them in chunk order, which keeps the
// output independent of the worker count. The exception from the lowest
// failing chunk is rethrown.
template <class Fn>
void parallel_chunks(std::size_t chunks, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_chunk = chunks;
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (c < first_error_chunk) {
          first_error_chunk = c;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned i = 0; i < workers; ++i) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Linear map from observations to least-squares coefficients: row j of the
// result gives the weights of coefficient j.
inline Eigen::MatrixXd least_squares_operator(const Eigen::MatrixXd& design) {
  return design.completeOrthogonalDecomposition().pseudoInverse();
}

// Design matrix for the extrapolation model y = b0 + b1 * x.
inline Eigen::MatrixXd affine_design(const std::vector<double>& x) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = x[i];
  }
  return a;
}

// Mean and standard error of a sample, summed in index order.
struct SampleMean {
  double mean = 0.0;
  double std_error = 0.0;
};

inline SampleMean sample_mean(const std::vector<double>& values) {
  SampleMean out;
  if (values.empty()) return out;
  NeumaierSum s;
  for (double v : values) s.add(v);
  out.mean = s.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    NeumaierSum q;
    for (double v : values) q.add((v - out.mean) * (v - out.mean));
    const double n = static_cast<double>(values.size());
    out.std_error = std::sqrt(q.value() / (n - 1.0) / n);
  }
  return out;
}

}  // namespace skewdim
