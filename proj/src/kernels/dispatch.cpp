#include <cstdlib>
#include <string_view>

#include "spdekit/kernels.hpp"

namespace spdekit::kernels {

#if defined(SPDEKIT_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

const KernelTable* avx2_kernels() noexcept {
#if defined(SPDEKIT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable* selected = [] {
    const char* env = std::getenv("SPDEKIT_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }();
  return *selected;
}

}  // namespace spdekit::kernels
