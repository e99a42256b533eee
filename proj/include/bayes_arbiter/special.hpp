#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "errors.hpp"

namespace bayes_arbiter {

/// ln Gamma(x) for x > 0.
///
/// Arguments below 10 are shifted up with the recurrence
/// Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1)); from 10 on the Stirling
/// series is truncated after the x^-13 term, whose successor is below 4e-17.
inline double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    if (std::isinf(x)) return x;

    double shift = 0.0;
    if (x < 10.0) {
        double prod = 1.0;
        while (x < 10.0) {
            prod *= x;
            x += 1.0;
        }
        shift = std::log(prod);
    }
    constexpr double half_log_two_pi = 0.91893853320467274178;
    const double r = 1.0 / x;
    const double r2 = r * r;
    const double series =
        r * (1.0 / 12.0 +
             r2 * (-1.0 / 360.0 +
                   r2 * (1.0 / 1260.0 +
                         r2 * (-1.0 / 1680.0 +
                               r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360360.0 + r2 * (1.0 / 156.0)))))));
    return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift;
}

inline double log_beta(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// ln(x!) for a count.
inline double log_factorial(long long x) {
    if (x < 0) throw DomainError("log_factorial: negative argument");
    return log_gamma(static_cast<double>(x) + 1.0);
}

/// ln(e^a + e^b), exact at -inf.
inline double log_add_exp(double a, double b) noexcept {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> values) noexcept {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc);
}

/// 1 / (1 + e^{-x}) without overflow.
inline double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

/// ln(1 + e^x)
inline double softplus(double x) noexcept {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// P(Z >= z) for standard normal Z.
inline double normal_upper_tail(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

} // namespace bayes_arbiter
