#include "gauss_ad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>

#include "gauss_ad/error.hpp"
#include "gauss_ad/gaussian.hpp"
#include "gauss_ad/kernels.hpp"

namespace gauss_ad {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
// relative slack on cumulative-sum comparisons
constexpr double kBoundarySlack = 1e-10;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Compression Compression::parse(const std::string& text) {
    if (text == "none") return none();
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw UsageError("compression must be none, pca:<q> or npca:<q>, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    double q = 0.0;
    std::size_t used = 0;
    try {
        q = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size() || !(q > 0.0 && q < 1.0))
        throw UsageError("compression fraction must lie in (0,1), got '" + value + "'");
    if (kind == "pca") return pca(q);
    if (kind == "npca") return npca(q);
    throw UsageError("unknown compression '" + kind + "'");
}

std::string Compression::to_string() const {
    if (mode == Mode::none) return "none";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%.17g", mode == Mode::pca ? "pca" : "npca", q);
    return buf;
}

Eigensystem eigendecompose(const Matrix& cov) {
    const std::size_t d = cov.rows();
    if (d == 0 || cov.cols() != d) throw DataError("eigendecompose: matrix is not square");
    double scale = 0.0;
    for (double v : cov.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(cov(i, j) - cov(j, i)) > kSymmetryTolerance * std::max(scale, 1.0))
                throw DataError("eigendecompose: matrix is not symmetric");

    const Eigen::Map<const RowMajor> a(cov.data(), static_cast<Eigen::Index>(d),
                                       static_cast<Eigen::Index>(d));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition did not converge");

    // Eigen returns ascending order.
    Eigensystem es{Vector(d), Matrix(d, d)};
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();
    const double max_abs = std::max(std::abs(values(0)), std::abs(values(d - 1)));
    for (std::size_t j = 0; j < d; ++j) {
        const auto src = static_cast<Eigen::Index>(d - 1 - j);
        double lambda = values(src);
        if (lambda < 0.0) {
            if (lambda < -1e-10 * std::max(max_abs, 1e-300))
                throw NumericError("covariance has a negative eigenvalue");
            lambda = 0.0;
        }
        es.values[j] = lambda;
        // Sign convention: the largest-magnitude entry of each vector is positive.
        Eigen::Index pivot = 0;
        vectors.col(src).cwiseAbs().maxCoeff(&pivot);
        const double sign = vectors(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i)
            es.vectors(i, j) = sign * vectors(static_cast<Eigen::Index>(i), src);
    }
    return es;
}

std::vector<std::size_t> select_components(std::span<const double> eigenvalues,
                                           const Compression& mode) {
    const std::size_t d = eigenvalues.size();
    if (d == 0) throw DataError("no eigenvalues to select from");
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (!(eigenvalues[i] >= 0.0)) throw DataError("eigenvalues must be non-negative");
        if (i > 0 && eigenvalues[i] > eigenvalues[i - 1])
            throw DataError("eigenvalues must be sorted in descending order");
        total += eigenvalues[i];
    }
    if (!(total > 0.0)) throw NumericError("all eigenvalues are zero");

    std::vector<std::size_t> keep;
    switch (mode.mode) {
        case Compression::Mode::none:
            for (std::size_t i = 0; i < d; ++i) keep.push_back(i);
            break;
        case Compression::Mode::pca: {
            const double budget = mode.q * total * (1.0 - kBoundarySlack);
            double cumulative = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                keep.push_back(i);
                cumulative += eigenvalues[i];
                if (cumulative >= budget) break;
            }
            break;
        }
        case Compression::Mode::npca: {
            const double budget = mode.q * total * (1.0 + kBoundarySlack);
            double cumulative = 0.0;
            std::size_t first = d;
            while (first > 0 && cumulative + eigenvalues[first - 1] <= budget) {
                cumulative += eigenvalues[first - 1];
                --first;
            }
            first = std::min(first, d - 1);
            for (std::size_t i = first; i < d; ++i) keep.push_back(i);
            break;
        }
    }
    return keep;
}

Projection fit_projection(const Matrix& x, const Compression& mode) {
    const EmpiricalMoments moments = fit_empirical(x);
    const Eigensystem es = eigendecompose(moments.covariance);
    const auto keep = select_components(es.values, mode);

    const std::size_t d = x.cols();
    Projection proj;
    proj.mode = mode;
    proj.center = moments.mean;
    proj.basis = Matrix(d, keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        proj.eigenvalues.push_back(es.values[keep[j]]);
        for (std::size_t i = 0; i < d; ++i) proj.basis(i, j) = es.vectors(i, keep[j]);
    }
    for (double v : es.values) proj.total_variance += v;
    return proj;
}

Vector project(const Projection& proj, std::span<const double> x) {
    const std::size_t d = proj.input_dim();
    if (x.size() != d)
        throw DataError("dimension mismatch: projection expects " + std::to_string(d) +
                        ", sample has " + std::to_string(x.size()));
    const auto& k = kernels::active();
    Vector centered(d);
    k.subtract(x.data(), proj.center.data(), centered.data(), d);
    Vector out(proj.output_dim(), 0.0);
    for (std::size_t i = 0; i < d; ++i)
        if (centered[i] != 0.0) k.axpy(centered[i], proj.basis.row(i).data(), out.data(), out.size());
    return out;
}

Matrix project(const Projection& proj, const Matrix& x) {
    Matrix out(x.rows(), proj.output_dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const Vector y = project(proj, x.row(r));
        std::copy(y.begin(), y.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace gauss_ad
