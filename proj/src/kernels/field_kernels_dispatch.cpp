#include <cstdlib>
#include <string_view>

#include "zkgraph/field_kernels.hpp"

namespace zkgraph::kernels {

#if defined(ZKGRAPH_HAVE_AVX2_TU)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(ZKGRAPH_HAVE_AVX2_TU)
  static const bool supported = __builtin_cpu_supports("avx2");
  if (supported) return &avx2_kernel_table();
#endif
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("ZKGRAPH_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") {
      return &scalar_kernels();
    }
    if (const KernelTable* avx2 = avx2_kernels()) return avx2;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace zkgraph::kernels
