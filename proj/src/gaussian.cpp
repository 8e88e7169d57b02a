#include "gauss_ad/gaussian.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numbers>

#include "gauss_ad/error.hpp"
#include "gauss_ad/kernels.hpp"

namespace gauss_ad {
namespace {

// Pivots at or below this fraction of the largest diagonal entry count as zero.
constexpr double kPivotTolerance = 1e-13;
constexpr double kJitter = 1e-10;
constexpr double kAutoFloor = 1e-6;

struct Scatter {
    Vector mean;
    Matrix centered;  // rows x_i - mean
    Matrix scatter;   // sum_i (x_i - mean)(x_i - mean)^T, exactly symmetric
};

void require_fit_input(const Matrix& x) {
    if (x.rows() < 2)
        throw DataError("insufficient samples: need at least 2, got " + std::to_string(x.rows()));
    if (x.cols() == 0) throw DataError("zero-dimensional features");
    for (double v : x.values())
        if (!std::isfinite(v)) throw DataError("non-finite input value");
}

Scatter scatter_of(const Matrix& x) {
    const auto& k = kernels::active();
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    Scatter s;
    s.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) k.axpy(1.0, x.row(r).data(), s.mean.data(), d);
    for (double& m : s.mean) m /= static_cast<double>(n);

    s.centered = Matrix(n, d);
    for (std::size_t r = 0; r < n; ++r)
        k.subtract(x.row(r).data(), s.mean.data(), s.centered.row(r).data(), d);

    // Upper triangle by rank-1 updates, then mirrored.
    s.scatter = Matrix(d, d);
    for (std::size_t r = 0; r < n; ++r) {
        const double* dev = s.centered.row(r).data();
        for (std::size_t i = 0; i < d; ++i)
            if (dev[i] != 0.0) k.axpy(dev[i], dev + i, s.scatter.row(i).data() + i, d - i);
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) s.scatter(i, j) = s.scatter(j, i);
    return s;
}

double trace(const Matrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

double ledoit_wolf_from_scatter(const Scatter& s) {
    const auto& k = kernels::active();
    const std::size_t n = s.centered.rows();
    const std::size_t d = s.centered.cols();
    const double nn = static_cast<double>(n);
    const double dd = static_cast<double>(d);

    Matrix biased = s.scatter;
    for (std::size_t i = 0; i < biased.values().size(); ++i) biased.data()[i] /= nn;

    const double mu = trace(biased) / dd;
    double delta = 0.0;  // ||S - mu I||_F^2 / D
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double e = biased(i, j) - (i == j ? mu : 0.0);
            delta += e * e;
        }
    delta /= dd;
    if (!(delta > 0.0)) return 1.0;

    // sum_i ||x_i x_i^T - S||_F^2 = sum_i ||x_i||^4 - n ||S||_F^2
    double fourth = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double sq = k.dot(s.centered.row(r).data(), s.centered.row(r).data(), d);
        fourth += sq * sq;
    }
    const double s_norm = k.dot(biased.data(), biased.data(), d * d);
    const double beta_bar = std::max(0.0, (fourth / nn - s_norm) / (nn * dd));
    const double beta = std::min(beta_bar, delta);
    return std::clamp(beta / delta, 0.0, 1.0);
}

}  // namespace

Shrinkage Shrinkage::parse(const std::string& text) {
    if (text == "auto") return automatic();
    if (text == "none") return none();
    if (text.rfind("fixed:", 0) == 0) {
        std::size_t used = 0;
        double rho = 0.0;
        try {
            rho = std::stod(text.substr(6), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 6 || !(rho >= 0.0 && rho <= 1.0))
            throw UsageError("shrinkage 'fixed:<rho>' needs rho in [0,1], got '" + text + "'");
        return fixed(rho);
    }
    throw UsageError("unknown shrinkage '" + text + "' (expected auto, none or fixed:<rho>)");
}

std::string Shrinkage::to_string() const {
    switch (mode) {
        case Mode::automatic: return "auto";
        case Mode::none: return "none";
        case Mode::fixed: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "fixed:%.17g", rho);
            return buf;
        }
    }
    return "auto";
}

EmpiricalMoments fit_empirical(const Matrix& x) {
    require_fit_input(x);
    Scatter s = scatter_of(x);
    const double denom = static_cast<double>(x.rows() - 1);
    for (std::size_t i = 0; i < s.scatter.values().size(); ++i) s.scatter.data()[i] /= denom;
    return {std::move(s.mean), std::move(s.scatter)};
}

double ledoit_wolf_rho(const Matrix& x) {
    require_fit_input(x);
    return ledoit_wolf_from_scatter(scatter_of(x));
}

Matrix cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw DataError("cholesky: matrix is not square");
    const auto& k = kernels::active();
    const std::size_t d = a.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, a(i, i));
    const double floor = kPivotTolerance * max_diag;

    Matrix l(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        const double* li = l.row(i).data();
        for (std::size_t j = 0; j < i; ++j) {
            const double s = a(i, j) - k.dot(li, l.row(j).data(), j);
            l(i, j) = s / l(j, j);
        }
        const double pivot = a(i, i) - k.dot(li, li, i);
        if (!std::isfinite(pivot) || !(pivot > floor)) throw NumericError("singular covariance");
        l(i, i) = std::sqrt(pivot);
    }
    return l;
}

GaussianModel fit_gaussian(const Matrix& x, Shrinkage shrinkage) {
    require_fit_input(x);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Scatter s = scatter_of(x);

    double rho = 0.0;
    switch (shrinkage.mode) {
        case Shrinkage::Mode::automatic: rho = ledoit_wolf_from_scatter(s); break;
        case Shrinkage::Mode::fixed:
            if (!(shrinkage.rho >= 0.0 && shrinkage.rho <= 1.0))
                throw UsageError("fixed shrinkage must lie in [0,1]");
            rho = shrinkage.rho;
            break;
        case Shrinkage::Mode::none: rho = 0.0; break;
    }

    Matrix sample = std::move(s.scatter);
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < sample.values().size(); ++i) sample.data()[i] /= denom;
    const double tr = trace(sample);
    const double target = tr > 0.0 ? tr / static_cast<double>(d) : 1.0;

    auto shrunk = [&](double r) {
        Matrix cov(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                cov(i, j) = (1.0 - r) * sample(i, j) + (i == j ? r * target : 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double avg = 0.5 * (cov(i, j) + cov(j, i));
                cov(i, j) = avg;
                cov(j, i) = avg;
            }
        return cov;
    };

    Matrix cov = shrunk(rho);
    Matrix chol;
    try {
        chol = cholesky(cov);
    } catch (const NumericError&) {
        const bool automatic = shrinkage.mode == Shrinkage::Mode::automatic;
        if (!(rho > 0.0) && !automatic) throw;
        Matrix jittered = cov;
        for (std::size_t i = 0; i < d; ++i) jittered(i, i) += kJitter * target;
        try {
            chol = cholesky(jittered);
            cov = std::move(jittered);
        } catch (const NumericError&) {
            if (!automatic) throw;
            // Ledoit-Wolf can return ~0 on degenerate designs (every centered
            // outer product equal to S); auto mode then floors the intensity.
            rho = std::max(rho, kAutoFloor);
            cov = shrunk(rho);
            chol = cholesky(cov);
        }
    }

    GaussianModel model;
    model.mean_ = std::move(s.mean);
    model.covariance_ = std::move(cov);
    model.chol_ = std::move(chol);
    model.shrinkage_ = rho;
    model.n_fit_ = n;
    return model;
}

GaussianModel GaussianModel::from_factor(Vector mean, Matrix chol, double shrinkage,
                                         std::size_t n_fit) {
    const std::size_t d = mean.size();
    if (d == 0 || chol.rows() != d || chol.cols() != d)
        throw DataError("model factor shape does not match mean dimension");
    if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) throw DataError("stored shrinkage outside [0,1]");
    if (n_fit < 2) throw DataError("stored n_fit below 2");
    for (std::size_t i = 0; i < d; ++i) {
        if (!(chol(i, i) > 0.0)) throw DataError("stored factor has a non-positive diagonal");
        for (std::size_t j = i + 1; j < d; ++j)
            if (chol(i, j) != 0.0) throw DataError("stored factor is not lower-triangular");
    }
    const auto& k = kernels::active();
    Matrix cov(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = k.dot(chol.row(i).data(), chol.row(j).data(), j + 1);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    GaussianModel model;
    model.mean_ = std::move(mean);
    model.covariance_ = std::move(cov);
    model.chol_ = std::move(chol);
    model.shrinkage_ = shrinkage;
    model.n_fit_ = n_fit;
    return model;
}

double GaussianModel::log_det() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) acc += std::log(chol_(i, i));
    return 2.0 * acc;
}

double mahalanobis_squared(const GaussianModel& model, std::span<const double> x) {
    const std::size_t d = model.dim();
    if (x.size() != d)
        throw DataError("dimension mismatch: model has " + std::to_string(d) + ", sample has " +
                        std::to_string(x.size()));
    const auto& k = kernels::active();
    const Matrix& l = model.chol_factor();
    Vector z(d);
    k.subtract(x.data(), model.mean().data(), z.data(), d);
    // Solve L z = x - mean in place.
    for (std::size_t i = 0; i < d; ++i) z[i] = (z[i] - k.dot(l.row(i).data(), z.data(), i)) / l(i, i);
    return k.dot(z.data(), z.data(), d);
}

double mahalanobis(const GaussianModel& model, std::span<const double> x) {
    return std::sqrt(mahalanobis_squared(model, x));
}

double log_density(const GaussianModel& model, std::span<const double> x) {
    const double m2 = mahalanobis_squared(model, x);
    const double d = static_cast<double>(model.dim());
    return -0.5 * m2 - 0.5 * (d * std::log(2.0 * std::numbers::pi) + model.log_det());
}

DiagonalModel fit_diagonal(const Matrix& x) {
    require_fit_input(x);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    DiagonalModel model{Vector(d, 0.0), Vector(d, 0.0)};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) model.mean[c] += x(r, c);
    for (double& m : model.mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            const double e = x(r, c) - model.mean[c];
            model.stddev[c] += e * e;
        }
    for (double& s : model.stddev) s = std::sqrt(s / static_cast<double>(n - 1));
    return model;
}

double sed(const DiagonalModel& model, std::span<const double> x, std::optional<double> epsilon) {
    const std::size_t d = model.mean.size();
    if (x.size() != d || model.stddev.size() != d)
        throw DataError("dimension mismatch: model has " + std::to_string(d) + ", sample has " +
                        std::to_string(x.size()));
    if (epsilon && !(*epsilon > 0.0)) throw UsageError("SED epsilon must be positive");

    Vector scale(d);
    std::string zero;
    std::size_t zero_count = 0;
    for (std::size_t i = 0; i < d; ++i) {
        double s = model.stddev[i];
        if (epsilon) s = std::max(s, *epsilon);
        if (!(s > 0.0)) {
            if (zero_count++ < 20) zero += (zero.empty() ? "" : ",") + std::to_string(i);
            continue;
        }
        scale[i] = 1.0 / s;
    }
    if (zero_count > 0)
        throw NumericError("zero-variance features (" + std::to_string(zero_count) + "): " + zero +
                           (zero_count > 20 ? ",..." : ""));
    return std::sqrt(kernels::active().scaled_squared_distance(x.data(), model.mean.data(),
                                                               scale.data(), d));
}

double l2(std::span<const double> mean, std::span<const double> x) {
    if (mean.size() != x.size())
        throw DataError("dimension mismatch: mean has " + std::to_string(mean.size()) +
                        ", sample has " + std::to_string(x.size()));
    return std::sqrt(kernels::active().squared_distance(x.data(), mean.data(), x.size()));
}

}  // namespace gauss_ad
