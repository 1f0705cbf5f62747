#pragma once

#include "textimpact/kernels.hpp"

namespace textimpact::kernels {

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double l1_distance(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void rotate(double c, double s, double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TEXTIMPACT_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double l1_distance(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void rotate(double c, double s, double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define TEXTIMPACT_HAVE_NEON_KERNELS 1
namespace neon {
double dot(const double* x, const double* y, std::size_t n);
double l1_distance(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void rotate(double c, double s, double* x, double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace textimpact::kernels
