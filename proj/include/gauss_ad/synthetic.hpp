#pragma once

#include <cstdint>
#include <vector>

#include "gauss_ad/feature_store.hpp"
#include "gauss_ad/matrix.hpp"
#include "gauss_ad/rng.hpp"

namespace gauss_ad {

// A Gaussian given by its mean and a lower-triangular factor L (cov = L L^T).
struct GaussianSource {
    Vector mean;
    Matrix factor;

    std::size_t dim() const noexcept { return mean.size(); }
    Matrix covariance() const;
};

// Random well-conditioned source: mean entries N(0, 1), covariance
// A A^T / D + 0.5 I with A standard normal.
GaussianSource random_source(std::size_t dim, Rng& rng);

// n draws of mean + L (z + shift) with z standard normal.
Matrix draw(const GaussianSource& source, std::size_t n, Rng& rng,
            std::span<const double> shift = {});

// Unit vector with uniformly random direction.
Vector random_direction(std::size_t dim, Rng& rng);

struct SyntheticConfig {
    std::vector<std::size_t> dims{8};
    std::size_t train = 200;
    std::size_t test_normal = 50;
    std::size_t test_anomalous = 50;
    double shift = 5.0;  // anomaly displacement in standard deviations along a random direction
    std::uint64_t seed = 42;
};

struct SyntheticDataset {
    std::vector<FeatureSet> levels;  // named level_1, level_2, ...
    LabelTable labels;
};

// Ids are `train/good/<i>`, `test/good/<i>` and `test/shifted/<i>`.
SyntheticDataset make_synthetic(const SyntheticConfig& config);

}  // namespace gauss_ad
