#include <cmath>

#include "backends.hpp"

namespace textimpact::kernels::scalar {

namespace {

// Lane layout shared with the vector backends.
inline double combine(const double (&acc)[4]) { return (acc[0] + acc[2]) + (acc[1] + acc[3]); }

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) {
      const double prod = x[i + lane] * y[i + lane];
      acc[lane] = acc[lane] + prod;
    }
  }
  double total = combine(acc);
  for (; i < n; ++i) {
    const double prod = x[i] * y[i];
    total = total + prod;
  }
  return total;
}

double l1_distance(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) acc[lane] += std::fabs(x[i + lane] - y[i + lane]);
  }
  double total = combine(acc);
  for (; i < n; ++i) total += std::fabs(x[i] - y[i]);
  return total;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void rotate(double c, double s, double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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

}  // namespace textimpact::kernels::scalar
