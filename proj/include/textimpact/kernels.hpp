#pragma once

// Dense double-precision inner loops shared by the numeric modules.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a vector implementation (AVX2 on x86-64, NEON on AArch64).
// The active implementation is chosen once at startup from the CPU features
// and can be overridden for testing.
//
// Reductions in every backend accumulate into four interleaved lanes
// (lane = index mod 4), combine them as (l0 + l2) + (l1 + l3), and then add
// the tail sequentially. The vector code never contracts multiply-add into
// FMA. Together these make all backends bit-identical, so artifacts do not
// depend on the machine's instruction set.

#include <cstddef>
#include <span>
#include <string_view>

namespace textimpact::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*l1_distance)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rotate)(double c, double s, double* x, double* y, std::size_t n);
};

bool backend_available(Backend backend) noexcept;
std::string_view backend_name(Backend backend) noexcept;

// Table for a specific backend. Throws std::invalid_argument when the
// backend is not compiled in or not supported by this CPU.
const KernelTable& table(Backend backend);

Backend active_backend() noexcept;
// Returns false (and leaves the active backend unchanged) if unavailable.
bool set_backend(Backend backend) noexcept;

const KernelTable& active() noexcept;

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline double squared_norm(std::span<const double> x) {
  return active().dot(x.data(), x.data(), x.size());
}

inline double l1_distance(std::span<const double> x, std::span<const double> y) {
  return active().l1_distance(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

inline void rotate(double c, double s, std::span<double> x, std::span<double> y) {
  active().rotate(c, s, x.data(), y.data(), x.size());
}

}  // namespace textimpact::kernels
