#include "backends.hpp"

#if defined(TEXTIMPACT_HAVE_NEON_KERNELS)

#include <arm_neon.h>

#include <cmath>

// Two 128-bit registers hold lanes (0, 1) and (2, 3) so the accumulation
// order matches the scalar reference exactly.

namespace textimpact::kernels::neon {

namespace {

inline double combine(float64x2_t acc01, float64x2_t acc23) {
  const float64x2_t pair = vaddq_f64(acc01, acc23);  // (l0 + l2, l1 + l3)
  return vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double total = combine(acc01, acc23);
  for (; i < n; ++i) {
    const double prod = x[i] * y[i];
    total = total + prod;
  }
  return total;
}

double l1_distance(const double* x, const double* y, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc01 = vaddq_f64(acc01, vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    acc23 = vaddq_f64(acc23, vabdq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double total = combine(acc01, acc23);
  for (; i < n; ++i) total += std::fabs(x[i] - y[i]);
  return total;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void rotate(double c, double s, double* x, double* y, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xi = vld1q_f64(x + i);
    const float64x2_t yi = vld1q_f64(y + i);
    vst1q_f64(x + i, vsubq_f64(vmulq_f64(vc, xi), vmulq_f64(vs, yi)));
    vst1q_f64(y + i, vaddq_f64(vmulq_f64(vs, xi), vmulq_f64(vc, yi)));
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

}  // namespace textimpact::kernels::neon

#endif
