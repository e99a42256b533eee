#pragma once

// Marginal likelihoods, Bayes factors and posterior model probabilities.
//
// Two testbeds:
//   * normal point null: xbar ~ N(theta, sigma^2/n), H0: theta = theta0 versus
//     H1: theta ~ N(theta0, sigma^2);
//   * Poisson versus mean-parameterised Geometric counts sharing a mean lambda
//     with the improper prior pi(lambda) = 1/lambda.
// Everything is in log space.

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace bayes_arbiter {

enum class EvidenceMethod { closed_form, quadrature, printed_formula };

inline std::string_view to_string(EvidenceMethod m) {
    switch (m) {
        case EvidenceMethod::closed_form: return "closed_form";
        case EvidenceMethod::quadrature: return "quadrature";
        case EvidenceMethod::printed_formula: return "printed_formula";
    }
    return "unknown";
}

enum class CountFamily { poisson, geometric };

inline std::string_view to_string(CountFamily f) {
    return f == CountFamily::poisson ? "poisson" : "geometric";
}

inline double log_pmf(CountFamily family, long long x, double mean) {
    return family == CountFamily::poisson ? log_pmf_poisson(x, mean) : log_pmf_geometric_mean(x, mean);
}

struct NormalSummary {
    std::size_t n = 1;
    double xbar = 0.0;
    double theta0 = 0.0;
    double sigma = 1.0;

    NormalSummary() = default;
    NormalSummary(std::size_t n_, double xbar_, double theta0_ = 0.0, double sigma_ = 1.0)
        : n(n_), xbar(xbar_), theta0(theta0_), sigma(sigma_) {
        if (n < 1) throw DomainError("NormalSummary: n must be at least 1");
        if (!(sigma > 0.0)) throw DomainError("NormalSummary: sigma must be positive");
    }

    /// (xbar - theta0) / sigma
    double standardized() const noexcept { return (xbar - theta0) / sigma; }
    /// t_n = sqrt(n) |xbar - theta0| / sigma
    double t_statistic() const noexcept { return std::sqrt(static_cast<double>(n)) * std::fabs(standardized()); }
};

struct LogEvidence {
    double log_value = 0.0;
    std::string model;
    EvidenceMethod method = EvidenceMethod::closed_form;
};

struct LogBayesFactor {
    double log_bf = 0.0;
    std::string numerator_model;
    std::string denominator_model;
    EvidenceMethod method = EvidenceMethod::closed_form;

    double bf() const noexcept { return std::exp(log_bf); }
    LogBayesFactor inverted() const { return {-log_bf, denominator_model, numerator_model, method}; }
};

inline LogBayesFactor bayes_factor(const LogEvidence& numerator, const LogEvidence& denominator) {
    return {numerator.log_value - denominator.log_value, numerator.model, denominator.model, numerator.method};
}

class ModelWeights {
public:
    explicit ModelWeights(std::vector<double> w) : weights_(std::move(w)) {
        if (weights_.empty()) throw DomainError("ModelWeights: empty");
        double total = 0.0;
        for (double x : weights_) {
            if (!(x >= 0.0)) throw DomainError("ModelWeights: weights must be non-negative");
            total += x;
        }
        if (std::fabs(total - 1.0) > 1e-12) throw DomainError("ModelWeights: weights must sum to 1");
    }

    static ModelWeights equal(std::size_t k) { return ModelWeights(std::vector<double>(k, 1.0 / static_cast<double>(k))); }

    std::span<const double> values() const noexcept { return weights_; }
    std::size_t size() const noexcept { return weights_.size(); }

private:
    std::vector<double> weights_;
};

/// log B10 = -1/2 ln(1+n) + n^2 z^2 / (2(1+n)), z the standardized mean.
inline LogBayesFactor log_bf10_normal(const NormalSummary& s) {
    const double n = static_cast<double>(s.n);
    const double z = s.standardized();
    return {-0.5 * std::log1p(n) + n * n * z * z / (2.0 * (1.0 + n)), "H1", "H0", EvidenceMethod::closed_form};
}

/// log B01(t) = 1/2 ln(1+n) - n t^2 / (2(1+n)).
inline LogBayesFactor log_bf01_lindley(double n, double t) {
    if (!(n >= 1.0)) throw DomainError("log_bf01_lindley: n must be at least 1");
    if (!(t >= 0.0)) throw DomainError("log_bf01_lindley: t must be non-negative");
    return {0.5 * std::log1p(n) - n * t * t / (2.0 * (1.0 + n)), "H0", "H1", EvidenceMethod::closed_form};
}

namespace detail {

inline void require_positive_sum(const CountDataset& data, std::string_view who) {
    if (data.sum() < 1)
        throw ImproperEvidenceError(std::string(who) +
                                    ": all observations are zero, so the 1/lambda prior gives an improper "
                                    "(infinite) marginal likelihood");
}

} // namespace detail

/// ln Gamma(S) - S ln n - sum ln x_i!
inline LogEvidence log_marginal_poisson_improper(const CountDataset& data) {
    detail::require_positive_sum(data, "log_marginal_poisson_improper");
    const double S = static_cast<double>(data.sum());
    const double n = static_cast<double>(data.n());
    return {log_gamma(S) - S * std::log(n) - data.log_factorial_sum(), "poisson", EvidenceMethod::closed_form};
}

/// ln Gamma(S) + ln Gamma(n) - ln Gamma(S + n)
inline LogEvidence log_marginal_geometric_improper(const CountDataset& data) {
    detail::require_positive_sum(data, "log_marginal_geometric_improper");
    const double S = static_cast<double>(data.sum());
    const double n = static_cast<double>(data.n());
    return {log_gamma(S) + log_gamma(n) - log_gamma(S + n), "geometric", EvidenceMethod::closed_form};
}

/// Poisson-versus-Geometric Bayes factor as it is usually quoted for this
/// example: n^{S} prod x_i! Gamma(n + 2 + S) / Gamma(n + 2). It does not equal the
/// ratio of the two 1/lambda marginals above, so it carries its own method
/// label and is never used silently in place of the shared-improper value.
inline LogBayesFactor log_bf12_printed(const CountDataset& data) {
    const double S = static_cast<double>(data.sum());
    const double n = static_cast<double>(data.n());
    return {S * std::log(n) + data.log_factorial_sum() + log_gamma(n + 2.0 + S) - log_gamma(n + 2.0), "poisson",
            "geometric", EvidenceMethod::printed_formula};
}

/// ln Gamma(S + n) - S ln n - sum ln x_i! - ln Gamma(n)
inline LogBayesFactor log_bf12_shared_improper(const CountDataset& data) {
    detail::require_positive_sum(data, "log_bf12_shared_improper");
    const double S = static_cast<double>(data.sum());
    const double n = static_cast<double>(data.n());
    return {log_gamma(S + n) - S * std::log(n) - data.log_factorial_sum() - log_gamma(n), "poisson", "geometric",
            EvidenceMethod::closed_form};
}

/// Prior on the mean lambda for quadrature. `reciprocal` is the improper
/// 1/lambda prior; `gamma` is a proper Gamma(shape, rate).
struct LambdaPrior {
    enum class Kind { reciprocal, gamma } kind = Kind::reciprocal;
    double shape = 1.0;
    double rate = 1.0;

    static LambdaPrior reciprocal() { return {}; }
    static LambdaPrior gamma(double shape, double rate) {
        if (!(shape > 0.0 && rate > 0.0)) throw DomainError("LambdaPrior: gamma shape and rate must be positive");
        return {Kind::gamma, shape, rate};
    }

    /// log prior density times the Jacobian d lambda / du at lambda = e^u.
    double log_density_on_log_axis(double u) const {
        if (kind == Kind::reciprocal) return 0.0;
        return shape * u - rate * std::exp(u) + shape * std::log(rate) - log_gamma(shape);
    }
};

/// log of sum_i log f(x_i | lambda) as a function of u = ln lambda, using only
/// sufficient statistics.
inline double log_likelihood_on_log_axis(CountFamily family, const CountDataset& data, double u) {
    const double S = static_cast<double>(data.sum());
    const double n = static_cast<double>(data.n());
    if (family == CountFamily::poisson) return S * u - n * std::exp(u) - data.log_factorial_sum();
    // x ln(lambda) - (x+1) ln(1+lambda), summed
    return S * u - (S + n) * softplus(u);
}

/// Numerical marginal likelihood on the axis u = ln lambda.
inline LogEvidence log_marginal_quadrature(const CountDataset& data, CountFamily family,
                                           const LambdaPrior& prior = LambdaPrior::reciprocal(),
                                           const QuadratureConfig& cfg = {}) {
    if (prior.kind == LambdaPrior::Kind::reciprocal) detail::require_positive_sum(data, "log_marginal_quadrature");
    auto log_f = [&](double u) {
        return log_likelihood_on_log_axis(family, data, u) + prior.log_density_on_log_axis(u);
    };
    const double start = data.sum() > 0 ? std::log(data.mean()) : 0.0;
    const auto result = integrate_log(log_f, start, cfg);
    return {result.log_value, std::string(to_string(family)), EvidenceMethod::quadrature};
}

/// Normal testbed Bayes factor with the H1 marginal integrated numerically
/// over theta ~ N(theta0, sigma^2).
inline LogBayesFactor log_bf10_normal_quadrature(const NormalSummary& s, const QuadratureConfig& cfg = {}) {
    const double n = static_cast<double>(s.n);
    const double z = s.standardized();
    const double se = 1.0 / std::sqrt(n);
    auto log_f = [&](double mu) { return log_pdf_normal(z, mu, se) + log_pdf_normal(mu, 0.0, 1.0); };
    const auto m1 = integrate_log(log_f, z * n / (n + 1.0), cfg);
    const double m0 = log_pdf_normal(z, 0.0, se);
    return {m1.log_value - m0, "H1", "H0", EvidenceMethod::quadrature};
}

/// omega_i m_i / sum_j omega_j m_j, computed in log space.
inline std::vector<double> posterior_model_probabilities(std::span<const double> log_evidences,
                                                         const ModelWeights& weights) {
    if (log_evidences.size() != weights.size())
        throw DomainError("posterior_model_probabilities: one weight per model required");
    std::vector<double> terms(log_evidences.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (std::isnan(log_evidences[i]) || log_evidences[i] == std::numeric_limits<double>::infinity())
            throw DomainError("posterior_model_probabilities: evidences must be finite");
        const double w = weights.values()[i];
        terms[i] = w > 0.0 ? std::log(w) + log_evidences[i] : -std::numeric_limits<double>::infinity();
    }
    const double total = log_sum_exp(terms);
    if (!std::isfinite(total))
        throw DegeneracyError("posterior_model_probabilities: every weighted evidence is zero");
    std::vector<double> probs(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) probs[i] = std::exp(terms[i] - total);
    return probs;
}

inline std::vector<double> posterior_model_probabilities(std::span<const LogEvidence> evidences,
                                                         const ModelWeights& weights) {
    std::vector<double> logs;
    logs.reserve(evidences.size());
    for (const auto& e : evidences) logs.push_back(e.log_value);
    return posterior_model_probabilities(std::span<const double>(logs), weights);
}

/// P(M1 | x) = B12 / (1 + B12) under equal prior weights.
inline double posterior_probability_from_log_bf(double log_bf12) noexcept { return logistic(log_bf12); }

} // namespace bayes_arbiter
