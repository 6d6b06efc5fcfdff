#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library paths they are compared against.

#include <cmath>
#include <cstddef>
#include <random>

namespace dephasim::test {

/// L_m(x) from its explicit coefficients sum_k C(m,k) (-x)^k / k!, in long double.
/// Fine for small m; cancellation makes it useless for large m x.
inline long double laguerre_explicit(unsigned m, long double x) {
  long double sum = 0.0L;
  long double binom = 1.0L;      // C(m, k)
  long double power = 1.0L;      // (-x)^k / k!
  for (unsigned k = 0; k <= m; ++k) {
    if (k > 0) {
      binom *= static_cast<long double>(m - k + 1) / k;
      power *= -x / k;
    }
    sum += binom * power;
  }
  return sum;
}

/// L_m(x) by recurrence in long double, for sums over many m.
inline long double laguerre_ld(unsigned m, long double x) {
  long double prev = 1.0L;
  if (m == 0) return prev;
  long double cur = 1.0L - x;
  for (unsigned k = 1; k < m; ++k) {
    const long double next = ((2.0L * k + 1.0L - x) * cur - k * prev) / (k + 1.0L);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// J0 by its power series, summed in long double to a fixed 80 terms.
inline long double j0_series(long double x) {
  const long double q = -0.25L * x * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
  }
  return sum;
}

template <class F>
double bisect(F&& f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Composite Simpson rule with n (even) intervals, accumulated in long double.
template <class F>
long double simpson(F&& f, long double a, long double b, std::size_t n) {
  if (n % 2) ++n;
  const long double h = (b - a) / static_cast<long double>(n);
  long double acc = f(a) + f(b);
  for (std::size_t k = 1; k < n; ++k) acc += (k % 2 ? 4.0L : 2.0L) * f(a + h * static_cast<long double>(k));
  return acc * h / 3.0L;
}

/// sum_m (1 - q) q^m e^{-z/2} L_m(z) with q = e^{-w/T}, truncated at m_max.
inline long double boltzmann_fock_sum(double omega, double temperature, double z, unsigned m_max) {
  if (temperature == 0.0) return std::exp(-0.5L * z);
  const long double q = std::exp(-static_cast<long double>(omega) / temperature);
  long double weight = 1.0L - q;
  long double acc = 0.0L;
  for (unsigned m = 0; m <= m_max; ++m) {
    acc += weight * laguerre_ld(m, z);
    weight *= q;
  }
  return acc * std::exp(-0.5L * z);
}

/// Seeded generator for hand-rolled property tests.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  unsigned integer(unsigned lo, unsigned hi) {
    return std::uniform_int_distribution<unsigned>(lo, hi)(rng_);
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace dephasim::test
