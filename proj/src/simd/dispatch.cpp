#include <cstdlib>
#include <string>

#include "simd/kernels_detail.hpp"

namespace winmart::simd {

const KernelTable* avx2_kernels() {
#if defined(WINMART_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() {
    static const KernelTable& chosen = []() -> const KernelTable& {
        const char* env = std::getenv("WINMART_KERNEL");
        if (env != nullptr && std::string(env) == "scalar") return scalar_kernels();
        if (const KernelTable* wide = avx2_kernels()) return *wide;
        return scalar_kernels();
    }();
    return chosen;
}

std::string to_string(KernelKind kind) {
    return kind == KernelKind::Scalar ? "scalar" : "avx2";
}

} // namespace winmart::simd
