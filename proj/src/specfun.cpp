#include "gauss_ad/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gauss_ad/error.hpp"

namespace gauss_ad {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 100000;

// Stirling series remainder coefficients B_2k / (2k (2k - 1)), k = 1..9.
constexpr double kStirling[] = {
    1.0 / 12.0,          -1.0 / 360.0,        1.0 / 1260.0,
    -1.0 / 1680.0,       1.0 / 1188.0,        -691.0 / 360360.0,
    1.0 / 156.0,         -3617.0 / 122400.0,  43867.0 / 244188.0,
};

// ln Gamma via the Stirling series; only called with z >= 10.
double log_gamma_stirling(double z) {
    const double inv = 1.0 / z;
    const double inv2 = inv * inv;
    double series = 0.0;
    double power = inv;
    for (double c : kStirling) {
        series += c * power;
        power *= inv2;
    }
    const double half_log_two_pi = 0.91893853320467274178;
    return (z - 0.5) * std::log(z) - z + half_log_two_pi + series;
}

// x^s e^{-x} / Gamma(s)
double gamma_prefactor(double s, double x) { return std::exp(s * std::log(x) - x - log_gamma(s)); }

double lower_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double ap = s;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) return sum * gamma_prefactor(s, x);
    }
    throw NumericError("incomplete gamma series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(s, x).
double upper_fraction(double s, double x) {
    double b = x + 1.0 - s;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) return h * gamma_prefactor(s, x);
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

void check_gamma_domain(double s, double x) {
    if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("incomplete gamma needs s > 0");
    if (!(x >= 0.0)) throw UsageError("incomplete gamma needs x >= 0");
}

// Acklam's rational approximation of the standard normal quantile
// (relative error below 1.2e-9); good enough to seed Newton iterations.
double normal_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - low) return -normal_quantile(1.0 - p);
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Wilson-Hilferty cube approximation of the chi-square quantile.
double wilson_hilferty(std::size_t k, double p) {
    const double kk = static_cast<double>(k);
    const double h = 2.0 / (9.0 * kk);
    const double base = 1.0 - h + normal_quantile(p) * std::sqrt(h);
    return kk * base * base * base;
}

}  // namespace

double log_gamma(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("log_gamma needs s > 0");
    if (s >= 10.0) return log_gamma_stirling(s);
    // Shift up by the recurrence Gamma(s + 1) = s Gamma(s).
    double product = 1.0;
    double z = s;
    while (z < 10.0) {
        product *= z;
        z += 1.0;
    }
    return log_gamma_stirling(z) - std::log(product);
}

double reg_lower_inc_gamma(double s, double x) {
    check_gamma_domain(s, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < s + 1.0) return std::min(1.0, lower_series(s, x));
    return std::max(0.0, 1.0 - upper_fraction(s, x));
}

double reg_upper_inc_gamma(double s, double x) {
    check_gamma_domain(s, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < s + 1.0) return std::max(0.0, 1.0 - lower_series(s, x));
    return std::min(1.0, upper_fraction(s, x));
}

double chi2_pdf(std::size_t k, double x) {
    if (k == 0) throw UsageError("chi-square needs k >= 1");
    if (!(x >= 0.0)) return 0.0;
    const double half = 0.5 * static_cast<double>(k);
    if (x == 0.0) {
        if (k == 1) return std::numeric_limits<double>::infinity();
        return k == 2 ? 0.5 : 0.0;
    }
    return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * std::numbers::ln2 -
                    log_gamma(half));
}

double chi2_cdf(std::size_t k, double x) {
    if (k == 0) throw UsageError("chi-square needs k >= 1");
    if (!(x >= 0.0)) throw UsageError("chi-square CDF needs x >= 0");
    return reg_lower_inc_gamma(0.5 * static_cast<double>(k), 0.5 * x);
}

double chi2_inverse_cdf(std::size_t k, double p) {
    if (k == 0) throw UsageError("chi-square needs k >= 1");
    if (p == 1.0) throw UsageError("chi-square quantile at p = 1 is unbounded");
    if (!(p >= 0.0 && p < 1.0)) throw UsageError("chi-square quantile needs p in [0,1)");
    if (p == 0.0) return 0.0;

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(k));
    while (chi2_cdf(k, hi) < p) {
        lo = hi;
        hi *= 2.0;
    }

    double x = 0.5 * (lo + hi);
    if (k > 1000) {
        const double guess = wilson_hilferty(k, p);
        if (guess > lo && guess < hi) x = guess;
    }

    for (int iter = 0; iter < 400; ++iter) {
        const double f = chi2_cdf(k, x) - p;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x;
        else hi = x;
        if (std::abs(f) <= 4.0 * kEps || hi - lo <= 4.0 * kEps * hi) break;

        const double slope = chi2_pdf(k, x);
        double next = slope > 0.0 && std::isfinite(slope) ? x - f / slope : lo;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

WorkingPoint threshold_for_fpr(std::size_t dim, double fpr) {
    if (dim == 0) throw UsageError("working point needs dimension >= 1");
    if (!(fpr > 0.0 && fpr < 1.0)) throw UsageError("target FPR must lie in (0,1)");
    return {dim, fpr, std::sqrt(chi2_inverse_cdf(dim, 1.0 - fpr))};
}

}  // namespace gauss_ad
