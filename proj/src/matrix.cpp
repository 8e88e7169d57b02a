#include "gauss_ad/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "gauss_ad/kernels.hpp"

namespace gauss_ad {

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), m.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = m.row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimensions differ");
    const auto& k = kernels::active();
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double s = a(i, p);
            if (s != 0.0) k.axpy(s, b.row(p).data(), dst, b.cols());
        }
    }
    return out;
}

double frobenius_norm(const Matrix& m) {
    const auto& k = kernels::active();
    return std::sqrt(k.dot(m.data(), m.data(), m.values().size()));
}

}  // namespace gauss_ad
