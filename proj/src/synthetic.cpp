#include "gauss_ad/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "gauss_ad/error.hpp"
#include "gauss_ad/gaussian.hpp"

namespace gauss_ad {

Matrix GaussianSource::covariance() const { return multiply(factor, factor.transposed()); }

GaussianSource random_source(std::size_t dim, Rng& rng) {
    GaussianSource src;
    src.mean.resize(dim);
    for (double& m : src.mean) m = rng.normal();
    Matrix a(dim, dim);
    for (std::size_t i = 0; i < a.values().size(); ++i) a.data()[i] = rng.normal();
    Matrix cov = multiply(a, a.transposed());
    for (std::size_t i = 0; i < cov.values().size(); ++i) cov.data()[i] /= static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) cov(i, i) += 0.5;
    src.factor = cholesky(cov);
    return src;
}

Matrix draw(const GaussianSource& source, std::size_t n, Rng& rng, std::span<const double> shift) {
    const std::size_t d = source.dim();
    if (!shift.empty() && shift.size() != d) throw DataError("shift dimension mismatch");
    Matrix out(n, d);
    Vector z(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal() + (shift.empty() ? 0.0 : shift[i]);
        for (std::size_t i = 0; i < d; ++i) {
            double v = source.mean[i];
            for (std::size_t j = 0; j <= i; ++j) v += source.factor(i, j) * z[j];
            out(r, i) = v;
        }
    }
    return out;
}

Vector random_direction(std::size_t dim, Rng& rng) {
    Vector u(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& v : u) {
            v = rng.normal();
            norm += v * v;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
    return u;
}

SyntheticDataset make_synthetic(const SyntheticConfig& config) {
    if (config.dims.empty()) throw UsageError("synthetic data needs at least one level");
    if (config.train < 2) throw UsageError("synthetic data needs at least 2 train samples");
    Rng rng(config.seed);

    SyntheticDataset ds;
    std::vector<std::string> ids;
    char buf[64];
    for (std::size_t i = 0; i < config.train; ++i) {
        std::snprintf(buf, sizeof buf, "train/good/%05zu", i);
        ids.push_back(buf);
        ds.labels.add(buf, {Label::normal, "synthetic"});
    }
    for (std::size_t i = 0; i < config.test_normal; ++i) {
        std::snprintf(buf, sizeof buf, "test/good/%05zu", i);
        ids.push_back(buf);
        ds.labels.add(buf, {Label::normal, "synthetic"});
    }
    for (std::size_t i = 0; i < config.test_anomalous; ++i) {
        std::snprintf(buf, sizeof buf, "test/shifted/%05zu", i);
        ids.push_back(buf);
        ds.labels.add(buf, {Label::anomalous, "synthetic"});
    }

    for (std::size_t l = 0; l < config.dims.size(); ++l) {
        const std::size_t d = config.dims[l];
        if (d == 0) throw UsageError("synthetic level dimension must be positive");
        const GaussianSource src = random_source(d, rng);
        const Vector u = random_direction(d, rng);
        // displacement of config.shift standard deviations of the projection onto u
        const Matrix cov = src.covariance();
        double var_u = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) var_u += u[i] * cov(i, j) * u[j];
        const double step = config.shift * std::sqrt(var_u);

        Matrix data(ids.size(), d);
        const Matrix normal = draw(src, config.train + config.test_normal, rng);
        Matrix shifted = draw(src, config.test_anomalous, rng);
        for (std::size_t r = 0; r < shifted.rows(); ++r)
            for (std::size_t i = 0; i < d; ++i) shifted(r, i) += step * u[i];
        for (std::size_t r = 0; r < normal.rows(); ++r)
            std::copy(normal.row(r).begin(), normal.row(r).end(), data.row(r).begin());
        for (std::size_t r = 0; r < shifted.rows(); ++r)
            std::copy(shifted.row(r).begin(), shifted.row(r).end(), data.row(normal.rows() + r).begin());
        ds.levels.push_back(FeatureSet{"level_" + std::to_string(l + 1), std::move(data), ids});
    }
    return ds;
}

}  // namespace gauss_ad
