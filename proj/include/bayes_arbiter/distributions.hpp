#pragma once

// Log densities and samplers for the Poisson, mean-parameterised Geometric,
// Normal, Gamma and Beta laws. All samplers draw only from Rng::uniform(),
// so sequences are fixed by the RngSeed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"
#include "rng.hpp"
#include "special.hpp"

namespace bayes_arbiter {

inline double log_pmf_poisson(long long x, double mean) {
    if (!(mean > 0.0)) throw DomainError("log_pmf_poisson: mean must be positive");
    if (x < 0) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(x) * std::log(mean) - mean - log_factorial(x);
}

/// Geometric failure count with success probability 1/(1+mean): p (1-p)^x.
inline double log_pmf_geometric_mean(long long x, double mean) {
    if (!(mean > 0.0)) throw DomainError("log_pmf_geometric_mean: mean must be positive");
    if (x < 0) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(x) * std::log(mean) - static_cast<double>(x + 1) * std::log1p(mean);
}

inline double log_pdf_normal(double x, double mu, double sd) {
    if (!(sd > 0.0)) throw DomainError("log_pdf_normal: sd must be positive");
    const double z = (x - mu) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double log_pdf_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("log_pdf_beta: shapes must be positive");
    if (!(x > 0.0 && x < 1.0)) return -std::numeric_limits<double>::infinity();
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

/// Inversion below mean 10, Hormann's PTRS transformed rejection above.
inline long long sample_poisson(double mean, Rng& rng) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("sample_poisson: mean must be positive");
    if (mean < 10.0) {
        const double u = rng.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        long long x = 0;
        // The cap only matters when u falls inside the last ulp of the cdf.
        while (u > cdf && x < 1000) {
            ++x;
            p *= mean / static_cast<double>(x);
            cdf += p;
        }
        return x;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const auto k = static_cast<long long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + static_cast<double>(k) * loglam - log_factorial(k))
            return k;
    }
}

/// Exact inversion: floor(ln U / ln(mean / (1 + mean))).
inline long long sample_geometric_mean(double mean, Rng& rng) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("sample_geometric_mean: mean must be positive");
    const double log_q = -std::log1p(1.0 / mean);
    return static_cast<long long>(std::floor(std::log(rng.uniform()) / log_q));
}

/// Box-Muller, cosine branch only (two uniforms per draw, no cached state).
inline double sample_normal(double mu, double sd, Rng& rng) {
    if (!(sd >= 0.0)) throw DomainError("sample_normal: sd must be non-negative");
    const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
    return mu + sd * r * std::cos(2.0 * std::numbers::pi * rng.uniform());
}

/// ln of a Gamma(shape, 1) draw. Marsaglia-Tsang for shape >= 1; for shape < 1
/// the boost Gamma(shape+1) * U^{1/shape}, kept in log space so tiny shapes
/// do not underflow.
inline double sample_log_gamma_variate(double shape, Rng& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("sample_gamma: shape must be positive");
    if (shape < 1.0) {
        const double boosted = sample_log_gamma_variate(shape + 1.0, rng);
        return boosted + std::log(rng.uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = sample_normal(0.0, 1.0, rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
}

inline double sample_gamma(double shape, double rate, Rng& rng) {
    if (!(rate > 0.0)) throw DomainError("sample_gamma: rate must be positive");
    return std::exp(sample_log_gamma_variate(shape, rng)) / rate;
}

/// Gamma-ratio Beta draw, clamped to the open interval (0, 1).
inline double sample_beta(double a, double b, Rng& rng) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("sample_beta: shapes must be positive");
    const double lx = sample_log_gamma_variate(a, rng);
    const double ly = sample_log_gamma_variate(b, rng);
    const double p = logistic(lx - ly);
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    constexpr double hi = 1.0 - 0x1.0p-53;
    return std::clamp(p, lo, hi);
}

} // namespace bayes_arbiter
