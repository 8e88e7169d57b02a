#pragma once

#include <span>
#include <string>
#include <vector>

#include "gauss_ad/matrix.hpp"

namespace gauss_ad {

// Variance-based component selection applied before Gaussian fitting.
//   pca:q  keeps the leading components carrying at least q of the variance
//   npca:q keeps the trailing components carrying at most q of the variance
struct Compression {
    enum class Mode { none, pca, npca };

    Mode mode = Mode::none;
    double q = 0.0;

    static Compression none() { return {}; }
    static Compression pca(double q) { return {Mode::pca, q}; }
    static Compression npca(double q) { return {Mode::npca, q}; }

    // "none", "pca:<q>" or "npca:<q>" with q a fraction in (0,1)
    static Compression parse(const std::string& text);
    std::string to_string() const;
    bool enabled() const noexcept { return mode != Mode::none; }
};

struct Eigensystem {
    Vector values;   // descending
    Matrix vectors;  // column j belongs to values[j]
};

Eigensystem eigendecompose(const Matrix& cov);

// Indices into the descending eigenvalue list, ascending.
std::vector<std::size_t> select_components(std::span<const double> eigenvalues,
                                           const Compression& mode);

struct Projection {
    Matrix basis;  // D x d, orthonormal columns
    Vector eigenvalues;
    Compression mode;
    double total_variance = 0.0;
    Vector center;

    std::size_t input_dim() const noexcept { return basis.rows(); }
    std::size_t output_dim() const noexcept { return basis.cols(); }
};

// Eigendecomposes the unshrunk sample covariance of x and keeps the
// components chosen by mode.
Projection fit_projection(const Matrix& x, const Compression& mode);

Matrix project(const Projection& proj, const Matrix& x);
Vector project(const Projection& proj, std::span<const double> x);

}  // namespace gauss_ad
