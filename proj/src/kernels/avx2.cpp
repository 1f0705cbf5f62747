#include "backends.hpp"

#if defined(TEXTIMPACT_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cmath>

// Compiled with function-level target attributes so the rest of the library
// stays baseline x86-64. Only mul/add/sub are used; no FMA.
#define TEXTIMPACT_AVX2 __attribute__((target("avx2")))

namespace textimpact::kernels::avx2 {

namespace {

TEXTIMPACT_AVX2 inline double combine(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);  // lanes 0, 1
  const __m128d hi = _mm256_extractf128_pd(acc, 1);  // lanes 2, 3
  const __m128d pair = _mm_add_pd(lo, hi);  // (l0 + l2, l1 + l3)
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

TEXTIMPACT_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, prod);
  }
  double total = combine(acc);
  for (; i < n; ++i) {
    const double prod = x[i] * y[i];
    total = total + prod;
  }
  return total;
}

TEXTIMPACT_AVX2 double l1_distance(const double* x, const double* y, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, diff));
  }
  double total = combine(acc);
  for (; i < n; ++i) total += std::fabs(x[i] - y[i]);
  return total;
}

TEXTIMPACT_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

TEXTIMPACT_AVX2 void rotate(double c, double s, double* x, double* y, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    const __m256d yi = _mm256_loadu_pd(y + i);
    const __m256d nx = _mm256_sub_pd(_mm256_mul_pd(vc, xi), _mm256_mul_pd(vs, yi));
    const __m256d ny = _mm256_add_pd(_mm256_mul_pd(vs, xi), _mm256_mul_pd(vc, yi));
    _mm256_storeu_pd(x + i, nx);
    _mm256_storeu_pd(y + i, ny);
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    const double cx = c * xi;
    const double sy = s * yi;
    const double sx = s * xi;
    const double cy = c * yi;
    x[i] = cx - sy;
    y[i] = sx + cy;
  }
}

}  // namespace textimpact::kernels::avx2

#endif
