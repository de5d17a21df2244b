#include "gboc/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "gboc/error.hpp"
#include "kernels_impl.hpp"

namespace gboc::kernels {
namespace {

constexpr KernelTable kScalar{Backend::Scalar, scalar::dot, scalar::squared_distance, scalar::axpy,
                              scalar::vecmat};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2{Backend::Avx2, avx2::dot, avx2::squared_distance, avx2::axpy, avx2::vecmat};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeon{Backend::Neon, neon::dot, neon::squared_distance, neon::axpy, neon::vecmat};
#endif

const KernelTable* initial_table() {
  Backend chosen = best_available();
  if (const char* env = std::getenv("GBOC_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") chosen = Backend::Scalar;
    else if (want == "avx2" && available(Backend::Avx2)) chosen = Backend::Avx2;
    else if (want == "neon" && available(Backend::Neon)) chosen = Backend::Neon;
  }
  return &table(chosen);
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> t{initial_table()};
  return t;
}

}  // namespace

bool available(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_available() noexcept {
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

const KernelTable& table(Backend b) {
  if (!available(b)) {
    throw Error(ErrorCode::BadParams, "kernel backend " + std::string(name(b)) + " not available on this CPU");
  }
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      return kAvx2;
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Backend b) { current().store(&table(b), std::memory_order_release); }

std::string_view name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace gboc::kernels
