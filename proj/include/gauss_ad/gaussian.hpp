#pragma once

#include <optional>
#include <span>
#include <string>

#include "gauss_ad/matrix.hpp"

namespace gauss_ad {

// How the covariance is regularized before factorization.
struct Shrinkage {
    enum class Mode { automatic, fixed, none };

    Mode mode = Mode::automatic;
    double rho = 0.0;  // used by Mode::fixed only

    static Shrinkage automatic() { return {Mode::automatic, 0.0}; }
    static Shrinkage fixed(double rho) { return {Mode::fixed, rho}; }
    static Shrinkage none() { return {Mode::none, 0.0}; }

    // "auto", "none" or "fixed:<rho>"
    static Shrinkage parse(const std::string& text);
    std::string to_string() const;
};

struct EmpiricalMoments {
    Vector mean;
    Matrix covariance;  // divisor n - 1
};

// Column means and unbiased sample covariance. Requires n >= 2.
EmpiricalMoments fit_empirical(const Matrix& x);

// Ledoit-Wolf (2004) shrinkage intensity towards (tr(S)/D) I. S uses divisor n
// here, matching the estimator's derivation. Constant data yields 1.
double ledoit_wolf_rho(const Matrix& x);

// Lower-triangular L with L L^T = a. Throws NumericError("singular covariance")
// when a pivot is not clearly positive.
Matrix cholesky(const Matrix& a);

class GaussianModel {
public:
    // Rebuilds a model from a stored factor; covariance := L L^T.
    static GaussianModel from_factor(Vector mean, Matrix chol, double shrinkage, std::size_t n_fit);

    const Vector& mean() const noexcept { return mean_; }
    const Matrix& covariance() const noexcept { return covariance_; }
    const Matrix& chol_factor() const noexcept { return chol_; }
    std::size_t dim() const noexcept { return mean_.size(); }
    double shrinkage() const noexcept { return shrinkage_; }
    std::size_t n_fit() const noexcept { return n_fit_; }

    // ln det covariance = 2 sum ln L_ii
    double log_det() const;

private:
    friend GaussianModel fit_gaussian(const Matrix& x, Shrinkage shrinkage);
    GaussianModel() = default;

    Vector mean_;
    Matrix covariance_;
    Matrix chol_;
    double shrinkage_ = 0.0;
    std::size_t n_fit_ = 0;
};

// covariance = (1 - rho) S + rho (tr(S)/D) I with S the unbiased sample
// covariance. The target falls back to I when tr(S) = 0.
GaussianModel fit_gaussian(const Matrix& x, Shrinkage shrinkage = Shrinkage::automatic());

// Squared Mahalanobis distance through a forward substitution with the
// Cholesky factor.
double mahalanobis_squared(const GaussianModel& model, std::span<const double> x);
double mahalanobis(const GaussianModel& model, std::span<const double> x);

double log_density(const GaussianModel& model, std::span<const double> x);

// Independent univariate Gaussians per feature.
struct DiagonalModel {
    Vector mean;
    Vector stddev;  // divisor n - 1
};

DiagonalModel fit_diagonal(const Matrix& x);

// Standardized Euclidean distance. With `epsilon`, each stddev is floored at
// it; without, a zero stddev is an error naming the offending features.
double sed(const DiagonalModel& model, std::span<const double> x,
           std::optional<double> epsilon = std::nullopt);

double l2(std::span<const double> mean, std::span<const double> x);

}  // namespace gauss_ad
