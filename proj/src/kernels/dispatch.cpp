#include <cstdlib>
#include <string_view>

#include "gauss_ad/kernels.hpp"

namespace gauss_ad::kernels {

#ifndef GAUSS_AD_HAVE_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool cpu_supports(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(GAUSS_AD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

namespace {

const KernelTable& select() noexcept {
    const char* forced = std::getenv("GAUSS_AD_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
    if (cpu_supports(Isa::avx2) && avx2_table() != nullptr) return *avx2_table();
    return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace gauss_ad::kernels
