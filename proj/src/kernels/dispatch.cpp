#include <atomic>
#include <stdexcept>

#include "backends.hpp"

namespace textimpact::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::l1_distance, &scalar::axpy, &scalar::rotate};

#if defined(TEXTIMPACT_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{&avx2::dot, &avx2::l1_distance, &avx2::axpy, &avx2::rotate};
#endif

#if defined(TEXTIMPACT_HAVE_NEON_KERNELS)
constexpr KernelTable kNeon{&neon::dot, &neon::l1_distance, &neon::axpy, &neon::rotate};
#endif

Backend detect() noexcept {
#if defined(TEXTIMPACT_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
#if defined(TEXTIMPACT_HAVE_NEON_KERNELS)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

bool backend_available(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(TEXTIMPACT_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(TEXTIMPACT_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& table(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(backend)));
  }
  switch (backend) {
#if defined(TEXTIMPACT_HAVE_AVX2_KERNELS)
    case Backend::Avx2: return kAvx2;
#endif
#if defined(TEXTIMPACT_HAVE_NEON_KERNELS)
    case Backend::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

bool set_backend(Backend backend) noexcept {
  if (!backend_available(backend)) return false;
  current().store(backend, std::memory_order_relaxed);
  return true;
}

const KernelTable& active() noexcept {
  switch (active_backend()) {
#if defined(TEXTIMPACT_HAVE_AVX2_KERNELS)
    case Backend::Avx2: return kAvx2;
#endif
#if defined(TEXTIMPACT_HAVE_NEON_KERNELS)
    case Backend::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

}  // namespace textimpact::kernels
