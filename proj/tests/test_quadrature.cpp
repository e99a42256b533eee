#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bayes_arbiter/quadrature.hpp"

using namespace bayes_arbiter;

TEST(GaussLegendre, ExactForPolynomials) {
    for (int m : {1, 2, 5, 20}) {
        const auto rule = gauss_legendre(m);
        for (int deg = 0; deg <= 2 * m - 1; ++deg) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], deg);
            const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
            EXPECT_NEAR(acc, exact, 1e-13) << "m=" << m << " deg=" << deg;
        }
    }
}

TEST(GaussLegendre, NodesAscendingAndSymmetric) {
    const auto rule = gauss_legendre(7);
    for (int i = 1; i < 7; ++i) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
    EXPECT_NEAR(rule.nodes[3], 0.0, 1e-15);
    EXPECT_NEAR(rule.nodes[0], -rule.nodes[6], 1e-15);
}

TEST(IntegrateLog, Gaussian) {
    // narrow, off-centre and very large-scale Gaussians
    for (double mu : {0.0, 3.7, -120.0})
        for (double sd : {1e-3, 1.0, 40.0}) {
            auto f = [&](double x) { return -0.5 * std::pow((x - mu) / sd, 2); };
            const auto r = integrate_log(f, 0.0);
            EXPECT_NEAR(r.log_value, std::log(sd * std::sqrt(2.0 * std::numbers::pi)), 1e-10)
                << mu << " " << sd;
            EXPECT_LE(r.bracket.lo, mu);
            EXPECT_GE(r.bracket.hi, mu);
        }
}

TEST(IntegrateLog, GammaOnLogAxis) {
    // int lambda^{a-1} e^{-b lambda} d lambda = Gamma(a) / b^a, on u = ln lambda
    const double a = 7.5, b = 0.3;
    auto f = [&](double u) { return a * u - b * std::exp(u); };
    const auto r = integrate_log(f, 0.0);
    EXPECT_NEAR(r.log_value, std::lgamma(a) - a * std::log(b), 1e-10);
}

TEST(IntegrateLog, HugeMagnitudes) {
    auto f = [](double x) { return 5000.0 - x * x; };
    const auto r = integrate_log(f, 10.0);
    EXPECT_NEAR(r.log_value, 5000.0 + 0.5 * std::log(std::numbers::pi), 1e-9);
}

TEST(IntegrateLog, DivergentIntegrandIsReported) {
    auto increasing = [](double u) { return 0.5 * u; };
    EXPECT_THROW(integrate_log(increasing, 0.0), ImproperEvidenceError);
    auto flat_tail = [](double u) { return -std::log1p(std::exp(u)); };  // tends to 0 as u -> -inf
    EXPECT_THROW(integrate_log(flat_tail, 0.0), ImproperEvidenceError);
}

TEST(IntegrateLog, NonConvergenceCarriesEstimate) {
    QuadratureConfig cfg;
    cfg.nodes_per_panel = 1;
    cfg.initial_panels = 1;
    cfg.max_refinements = 1;
    cfg.tolerance = 1e-15;
    auto f = [](double x) { return -0.5 * x * x; };
    try {
        integrate_log(f, 0.0, cfg);
        FAIL() << "expected AccuracyError";
    } catch (const AccuracyError& e) {
        EXPECT_TRUE(std::isfinite(e.estimate()));
    }
}
