#include "gauss_ad/kernels.hpp"

namespace gauss_ad::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double scaled_squared_distance_scalar(const double* x, const double* center, const double* scale,
                                      std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (x[i] - center[i]) * scale[i];
        acc += d * d;
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void subtract_scalar(const double* src, const double* center, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] - center[i];
}

void widen_scalar(const float* src, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<double>(src[i]);
}

constexpr KernelTable kScalar{
    Isa::scalar,
    "scalar",
    dot_scalar,
    squared_distance_scalar,
    scaled_squared_distance_scalar,
    axpy_scalar,
    subtract_scalar,
    widen_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace gauss_ad::kernels
