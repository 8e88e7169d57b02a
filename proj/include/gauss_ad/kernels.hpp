#pragma once

#include <cstddef>
#include <string_view>

namespace gauss_ad::kernels {

enum class Isa { scalar, avx2 };

// Inner loops used by the statistics code. Every entry has a scalar reference
// implementation; vector variants must agree with it up to summation-order
// rounding.
struct KernelTable {
    Isa isa;
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i (a_i - b_i)^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // sum_i ((x_i - center_i) * scale_i)^2
    double (*scaled_squared_distance)(const double* x, const double* center, const double* scale,
                                      std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // dst = src - center
    void (*subtract)(const double* src, const double* center, double* dst, std::size_t n);
    void (*widen)(const float* src, double* dst, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// Null when the build has no AVX2 translation unit.
const KernelTable* avx2_table() noexcept;

bool cpu_supports(Isa isa) noexcept;

// Table picked once per process: the best supported ISA unless the
// GAUSS_AD_SIMD environment variable names a lower one ("scalar").
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

}  // namespace gauss_ad::kernels
