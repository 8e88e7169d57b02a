#include "doctest.h"

#include <cmath>
#include <numeric>

#include "gauss_ad/error.hpp"
#include "gauss_ad/gaussian.hpp"
#include "gauss_ad/rng.hpp"
#include "gauss_ad/spectral.hpp"
#include "oracles.hpp"

using namespace gauss_ad;

namespace {

Matrix random_spd(std::size_t d, Rng& rng) {
    Matrix a(d, d);
    for (std::size_t i = 0; i < d * d; ++i) a.data()[i] = rng.normal();
    Matrix s = oracle::naive_multiply(a, a.transposed());
    for (std::size_t i = 0; i < d; ++i) s(i, i) += 0.1;
    return s;
}

Matrix sample_rows(std::size_t n, std::size_t d, Rng& rng) {
    Matrix x(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.normal() * (1.0 + c) + 0.5 * (r % 3);
    return x;
}

std::vector<std::size_t> indices(std::initializer_list<std::size_t> v) { return v; }

}  // namespace

TEST_CASE("Compression parsing") {
    CHECK(Compression::parse("none").mode == Compression::Mode::none);
    const auto p = Compression::parse("pca:0.95");
    CHECK(p.mode == Compression::Mode::pca);
    CHECK(p.q == 0.95);
    const auto n = Compression::parse("npca:0.01");
    CHECK(n.mode == Compression::Mode::npca);
    CHECK(Compression::parse(n.to_string()).q == n.q);
    for (const char* bad : {"pca", "pca:", "pca:1", "npca:0", "npca:-0.2", "pca:0.5x", "ica:0.5", "99%"})
        CHECK_THROWS_AS(Compression::parse(bad), UsageError);
}

TEST_CASE("eigendecompose of a diagonal matrix") {
    Matrix a(3, 3, 0.0);
    a(0, 0) = 1.0;
    a(1, 1) = 4.0;
    a(2, 2) = 2.0;
    const auto es = eigendecompose(a);
    CHECK(es.values == Vector{4.0, 2.0, 1.0});
    CHECK(es.vectors(1, 0) == doctest::Approx(1.0));
    CHECK(es.vectors(2, 1) == doctest::Approx(1.0));
    CHECK(es.vectors(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("eigendecompose of the zero matrix") {
    const auto es = eigendecompose(Matrix(4, 4, 0.0));
    CHECK(es.values == Vector(4, 0.0));
    const Matrix vtv = oracle::naive_multiply(es.vectors.transposed(), es.vectors);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(vtv(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("eigendecompose reconstructs random SPD matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix s = random_spd(6, rng);
        const auto es = eigendecompose(s);
        for (std::size_t j = 1; j < 6; ++j) CHECK(es.values[j] <= es.values[j - 1]);
        Matrix scaled = es.vectors;
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) scaled(i, j) *= es.values[j];
        const Matrix back = oracle::naive_multiply(scaled, es.vectors.transposed());
        Matrix diff = back;
        for (std::size_t i = 0; i < diff.values().size(); ++i) diff.data()[i] -= s.values()[i];
        CHECK(frobenius_norm(diff) <= 1e-8 * frobenius_norm(s));
        const Matrix vtv = oracle::naive_multiply(es.vectors.transposed(), es.vectors);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(vtv(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
}

TEST_CASE("eigendecompose rejects asymmetric and non-square input") {
    Matrix a = Matrix::identity(3);
    a(0, 2) = 0.5;
    CHECK_THROWS_AS(eigendecompose(a), DataError);
    CHECK_THROWS_AS(eigendecompose(Matrix(2, 3, 0.0)), DataError);
}

TEST_CASE("component selection examples") {
    const Vector nine_one{9.0, 1.0};
    CHECK(select_components(nine_one, Compression::pca(0.9)) == indices({0}));
    CHECK(select_components(nine_one, Compression::npca(0.1)) == indices({1}));
    CHECK(select_components(Vector{4.0, 1.0}, Compression::npca(1e-9)) == indices({1}));
    CHECK(select_components(nine_one, Compression::pca(0.95)) == indices({0, 1}));
    CHECK(select_components(nine_one, Compression::none()) == indices({0, 1}));
    CHECK(select_components(Vector{5.0, 3.0, 1.0, 1.0}, Compression::npca(0.25)) == indices({2, 3}));
    CHECK(select_components(Vector{5.0, 3.0, 1.0, 1.0}, Compression::pca(0.5)) == indices({0}));
    CHECK(select_components(Vector{5.0, 3.0, 1.0, 1.0}, Compression::pca(0.51)) == indices({0, 1}));
}

TEST_CASE("component selection rejects bad eigenvalue lists") {
    CHECK_THROWS(select_components(Vector{}, Compression::pca(0.5)));
    CHECK_THROWS(select_components(Vector{1.0, 2.0}, Compression::pca(0.5)));
    CHECK_THROWS(select_components(Vector{1.0, -1.0}, Compression::pca(0.5)));
    CHECK_THROWS_AS(select_components(Vector{0.0, 0.0}, Compression::pca(0.5)), NumericError);
}

TEST_CASE("selection is invariant to scaling the eigenvalues") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Vector ev(1 + rng.below(12));
        for (double& v : ev) v = std::exp(4.0 * rng.normal());
        std::sort(ev.rbegin(), ev.rend());
        const double q = 0.01 + 0.98 * rng.uniform();
        const double c = std::exp(3.0 * rng.normal());
        Vector scaled = ev;
        for (double& v : scaled) v *= c;
        for (auto mode : {Compression::pca(q), Compression::npca(q)})
            CHECK(select_components(ev, mode) == select_components(scaled, mode));
    }
}

TEST_CASE("PCA prefix and NPCA suffix partition at complementary boundary cuts") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 2 + rng.below(10);
        // distinct dyadic eigenvalues keep cumulative sums exact
        std::vector<double> ev;
        for (std::size_t i = 0; i < d; ++i) ev.push_back(static_cast<double>(8 * (d - i) + rng.below(8)));
        const double total = std::accumulate(ev.begin(), ev.end(), 0.0);
        const std::size_t cut = 1 + rng.below(d - 1);
        const double head = std::accumulate(ev.begin(), ev.begin() + static_cast<long>(cut), 0.0);
        const auto pca = select_components(ev, Compression::pca(head / total));
        const auto npca = select_components(ev, Compression::npca((total - head) / total));
        CAPTURE(d);
        CAPTURE(cut);
        REQUIRE(pca.size() == cut);
        REQUIRE(npca.size() == d - cut);
        std::vector<std::size_t> all = pca;
        all.insert(all.end(), npca.begin(), npca.end());
        for (std::size_t i = 0; i < d; ++i) CHECK(all[i] == i);
    }
}

TEST_CASE("fit_projection with all components reproduces the centered data") {
    Rng rng(21);
    const Matrix x = sample_rows(40, 5, rng);
    const Projection proj = fit_projection(x, Compression::none());
    CHECK(proj.input_dim() == 5);
    CHECK(proj.output_dim() == 5);
    const auto moments = fit_empirical(x);
    CHECK(proj.center == moments.mean);
    double trace = 0.0;
    for (std::size_t i = 0; i < 5; ++i) trace += moments.covariance(i, i);
    CHECK(proj.total_variance == doctest::Approx(trace).epsilon(1e-12));

    const Vector y0 = project(proj, proj.center);
    for (double v : y0) CHECK(v == 0.0);

    // orthonormal basis: norms preserved
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const Vector y = project(proj, x.row(r));
        double a = 0.0, b = 0.0;
        for (std::size_t c = 0; c < 5; ++c) {
            a += (x(r, c) - proj.center[c]) * (x(r, c) - proj.center[c]);
            b += y[c] * y[c];
        }
        CHECK(b == doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("project with an identity basis subtracts the center") {
    Projection proj;
    proj.basis = Matrix::identity(3);
    proj.center = {1.0, 2.0, 3.0};
    proj.eigenvalues = {1.0, 1.0, 1.0};
    CHECK(project(proj, Vector{4.0, 4.0, 4.0}) == Vector{3.0, 2.0, 1.0});
    CHECK_THROWS_AS(project(proj, Vector{1.0, 2.0}), DataError);
}

TEST_CASE("projected training variance equals the selected eigenvalues") {
    Rng rng(5);
    const Matrix x = sample_rows(300, 6, rng);
    for (auto mode : {Compression::pca(0.9), Compression::npca(0.2)}) {
        const Projection proj = fit_projection(x, mode);
        const Matrix y = project(proj, x);
        const auto m = fit_empirical(y);
        for (std::size_t j = 0; j < proj.output_dim(); ++j) {
            CHECK(std::abs(m.mean[j]) <= 1e-10);
            CHECK(m.covariance(j, j) == doctest::Approx(proj.eigenvalues[j]).epsilon(1e-9));
            for (std::size_t k = 0; k < j; ++k) CHECK(std::abs(m.covariance(j, k)) <= 1e-9 * proj.eigenvalues[0]);
        }
    }
}

TEST_CASE("PCA keeps the high-variance axis and NPCA the low-variance one") {
    Rng rng(9);
    Matrix x(500, 3);
    for (std::size_t r = 0; r < 500; ++r) {
        x(r, 0) = 0.01 * rng.normal();
        x(r, 1) = 10.0 * rng.normal();
        x(r, 2) = 1.0 * rng.normal();
    }
    const Projection pca = fit_projection(x, Compression::pca(0.9));
    REQUIRE(pca.output_dim() == 1);
    CHECK(std::abs(pca.basis(1, 0)) == doctest::Approx(1.0).epsilon(1e-3));
    const Projection npca = fit_projection(x, Compression::npca(1e-5));
    REQUIRE(npca.output_dim() == 1);
    CHECK(std::abs(npca.basis(0, 0)) == doctest::Approx(1.0).epsilon(1e-3));
}
