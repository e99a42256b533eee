#pragma once

// One-dimensional quadrature of exp(log_f) for unimodal log-integrands.
//
// The support is bracketed automatically: locate the mode, then walk out on
// each side until log_f drops below log_f(mode) - log_drop. The bracket is
// integrated with composite Gauss-Legendre panels whose count doubles until
// two successive estimates agree to `tolerance` in log. Sums are formed in
// log space so integrals far outside double range are fine.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

namespace bayes_arbiter {

struct QuadratureConfig {
    int nodes_per_panel = 20;
    int initial_panels = 4;
    int max_refinements = 10;
    double log_drop = 40.0;
    double tolerance = 1e-12;
    double initial_step = 0.5;
    int max_bracket_steps = 200;
};

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1], ascending
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int m) {
    if (m < 1) throw DomainError("gauss_legendre: need at least one node");
    GaussLegendreRule rule{std::vector<double>(m), std::vector<double>(m)};
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= m; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = m * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        // recompute the derivative at the converged root
        double p1 = 1.0, p2 = 0.0;
        for (int j = 1; j <= m; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        dp = m * (z * p1 - p2) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[m - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[m - 1 - i] = w;
    }
    return rule;
}

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double mode = 0.0;
    double log_max = 0.0;
};

/// Composite nodes on [lo, hi] with log weights.
struct CompositeNodes {
    std::vector<double> x;
    std::vector<double> log_w;
};

inline CompositeNodes composite_nodes(double lo, double hi, int panels, const GaussLegendreRule& rule) {
    CompositeNodes out;
    const double width = (hi - lo) / panels;
    out.x.reserve(panels * rule.nodes.size());
    out.log_w.reserve(panels * rule.nodes.size());
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width;
        const double mid = a + 0.5 * width;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            out.x.push_back(mid + 0.5 * width * rule.nodes[k]);
            out.log_w.push_back(std::log(0.5 * width * rule.weights[k]));
        }
    }
    return out;
}

namespace detail {

inline double checked(double v) {
    if (std::isnan(v)) throw DomainError("quadrature: log-integrand returned NaN");
    return v;
}

} // namespace detail

/// Locates the mode of a unimodal log-integrand and the interval where it stays
/// within log_drop of the maximum. Throws ImproperEvidenceError when the
/// function keeps increasing towards either end of the real line.
inline Bracket bracket_log_integrand(const std::function<double(double)>& log_f, double start,
                                     const QuadratureConfig& cfg) {
    using detail::checked;
    double h = cfg.initial_step;
    double x0 = start;
    double f0 = checked(log_f(x0));
    if (!std::isfinite(f0)) throw DomainError("quadrature: log-integrand not finite at start point");

    // Hill-climb with doubling steps until the maximum is enclosed in [a, c].
    double a = x0 - h, c = x0 + h;
    const double fl = checked(log_f(a));
    const double fr = checked(log_f(c));
    if (fl > f0 || fr > f0) {
        const double dir = fr >= fl ? 1.0 : -1.0;
        double prev = x0, cur = x0 + dir * h, fcur = dir > 0 ? fr : fl;
        double fprev = f0;
        int steps = 0;
        while (fcur >= fprev) {
            if (++steps > cfg.max_bracket_steps || !std::isfinite(cur))
                throw ImproperEvidenceError("quadrature: log-integrand increases without bound; integral diverges");
            h *= 2.0;
            prev = cur;
            fprev = fcur;
            cur = prev + dir * h;
            fcur = checked(log_f(cur));
        }
        a = std::min(prev - dir * h / 2.0, cur);
        c = std::max(prev - dir * h / 2.0, cur);
    }

    // Golden-section refinement of the mode.
    constexpr double inv_phi = 0.61803398874989484820;
    double x1 = c - inv_phi * (c - a), x2 = a + inv_phi * (c - a);
    double f1 = checked(log_f(x1)), f2 = checked(log_f(x2));
    for (int it = 0; it < 200 && (c - a) > 1e-12 * (1.0 + std::fabs(x1)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = checked(log_f(x2));
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = checked(log_f(x1));
        }
    }
    Bracket br;
    br.mode = f1 >= f2 ? x1 : x2;
    br.log_max = std::max({f1, f2, f0});
    if (f0 > std::max(f1, f2)) br.mode = x0;
    const double floor_level = br.log_max - cfg.log_drop;

    auto edge = [&](double dir) {
        double inside = 0.0, step = cfg.initial_step;
        int steps = 0;
        while (checked(log_f(br.mode + dir * step)) >= floor_level) {
            if (++steps > cfg.max_bracket_steps || !std::isfinite(step))
                throw ImproperEvidenceError("quadrature: integrand does not decay; integral diverges");
            inside = step;
            step *= 2.0;
        }
        double outside = step;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (checked(log_f(br.mode + dir * mid)) >= floor_level)
                inside = mid;
            else
                outside = mid;
        }
        return br.mode + dir * outside;
    };
    br.lo = edge(-1.0);
    br.hi = edge(1.0);
    return br;
}

struct LogIntegral {
    double log_value = 0.0;
    double error_estimate = 0.0;  // |difference of the last two estimates| in log
    int panels = 0;
    Bracket bracket;
};

inline double log_integrate_on(const std::function<double(double)>& log_f, const CompositeNodes& nodes) {
    std::vector<double> terms(nodes.x.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = nodes.log_w[i] + detail::checked(log_f(nodes.x[i]));
    return log_sum_exp(terms);
}

/// log of the integral of exp(log_f(x)) over the real line.
inline LogIntegral integrate_log(const std::function<double(double)>& log_f, double start,
                                 const QuadratureConfig& cfg = {}) {
    LogIntegral out;
    out.bracket = bracket_log_integrand(log_f, start, cfg);
    const auto rule = gauss_legendre(cfg.nodes_per_panel);
    int panels = cfg.initial_panels;
    double prev = log_integrate_on(log_f, composite_nodes(out.bracket.lo, out.bracket.hi, panels, rule));
    out.log_value = prev;
    out.panels = panels;
    for (int r = 0; r < cfg.max_refinements; ++r) {
        panels *= 2;
        const double cur = log_integrate_on(log_f, composite_nodes(out.bracket.lo, out.bracket.hi, panels, rule));
        out.log_value = cur;
        out.error_estimate = std::fabs(cur - prev);
        out.panels = panels;
        if (out.error_estimate <= cfg.tolerance) return out;
        prev = cur;
    }
    throw AccuracyError("quadrature: panel refinement did not converge", out.log_value);
}

} // namespace bayes_arbiter
