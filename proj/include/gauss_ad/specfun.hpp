#pragma once

#include <cstddef>

namespace gauss_ad {

// ln Gamma(s) for s > 0.
double log_gamma(double s);

// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
double reg_lower_inc_gamma(double s, double x);
// Complement Q(s, x) = 1 - P(s, x), evaluated without cancellation.
double reg_upper_inc_gamma(double s, double x);

// Chi-square distribution with k degrees of freedom.
double chi2_pdf(std::size_t k, double x);
double chi2_cdf(std::size_t k, double x);
// Smallest x with chi2_cdf(k, x) = p, for p in [0, 1).
double chi2_inverse_cdf(std::size_t k, double p);

// Decision threshold on the Mahalanobis distance for a D-dimensional model
// whose normal samples should exceed it with probability target_fpr.
struct WorkingPoint {
    std::size_t dim = 0;
    double target_fpr = 0.0;
    double threshold = 0.0;
};

WorkingPoint threshold_for_fpr(std::size_t dim, double fpr);

}  // namespace gauss_ad
