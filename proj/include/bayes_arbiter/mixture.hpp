#pragma once

// Posterior inference on the weight alpha of the two-component mixture
//
//     alpha * Poisson(lambda) + (1 - alpha) * Geometric(mean lambda),
//
// with alpha ~ Beta(a0, a0) and pi(lambda) = 1/lambda. Component 1 is always
// the Poisson law and component 2 always the Geometric law, so the labels
// carry meaning and no relabelling step exists.
//
// Three routes to the alpha posterior:
//   run_gibbs           latent allocations, conjugate alpha, random-walk
//                       Metropolis on ln lambda;
//   run_marginal_mh     random-walk Metropolis on (logit alpha, ln lambda)
//                       against the allocation-free likelihood;
//   grid_posterior_alpha  deterministic oracle (see its comment).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "special.hpp"
#include "stats.hpp"

namespace bayes_arbiter {

enum class Component : std::uint8_t { poisson = 1, geometric = 2 };

struct MixtureSpec {
    double a0 = 0.5;

    explicit MixtureSpec(double a0_ = 0.5) : a0(a0_) {
        if (!(a0 > 0.0) || !std::isfinite(a0)) throw DomainError("MixtureSpec: a0 must be positive");
    }
};

struct McmcConfig {
    std::size_t iterations = 10000;
    std::size_t burn_in = 2000;
    double initial_proposal_sd = 0.5;
    double target_acceptance = 0.44;
    bool adapt = true;

    void validate() const {
        if (iterations <= burn_in) throw DomainError("McmcConfig: iterations must exceed burn_in");
        if (!(initial_proposal_sd > 0.0)) throw DomainError("McmcConfig: proposal sd must be positive");
        if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
            throw DomainError("McmcConfig: target acceptance must lie in (0, 1)");
    }
};

struct BetaParameters {
    double a = 1.0;
    double b = 1.0;

    double mean() const noexcept { return a / (a + b); }
    friend bool operator==(const BetaParameters&, const BetaParameters&) = default;
};

struct AllocationState {
    std::vector<Component> z;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    Count S1 = 0;
    Count S2 = 0;

    /// Recounts the sufficient statistics from the labels.
    static AllocationState from_labels(const CountDataset& data, std::vector<Component> labels) {
        if (labels.size() != data.n()) throw DomainError("AllocationState: one label per observation required");
        AllocationState s;
        s.z = std::move(labels);
        for (std::size_t i = 0; i < s.z.size(); ++i) {
            if (s.z[i] == Component::poisson) {
                ++s.n1;
                s.S1 += data.values()[i];
            } else {
                ++s.n2;
                s.S2 += data.values()[i];
            }
        }
        return s;
    }

    /// Counts only, for callers that do not track labels.
    static AllocationState from_counts(std::size_t n1, Count S1, std::size_t n2, Count S2) {
        AllocationState s;
        s.n1 = n1;
        s.n2 = n2;
        s.S1 = S1;
        s.S2 = S2;
        return s;
    }
};

struct MixtureChain {
    std::vector<double> alpha_draws;
    std::vector<double> lambda_draws;
    std::size_t iterations = 0;
    std::size_t burn_in = 0;
    double mh_acceptance_rate = 0.0;
    double final_proposal_sd = 0.0;
    RngSeed seed;
    AllocationState final_state;  // empty labels for run_marginal_mh
    std::vector<std::string> warnings;
};

/// Full conditional of alpha given the allocations.
inline BetaParameters conditional_alpha(const AllocationState& state, double a0) {
    if (!(a0 > 0.0)) throw DomainError("conditional_alpha: a0 must be positive");
    return {a0 + static_cast<double>(state.n1), a0 + static_cast<double>(state.n2)};
}

/// P(z = Poisson | x) from the two component log densities.
inline double allocation_probability_from_logs(double log_f1, double log_f2, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("allocation_probability: alpha must lie in (0, 1)");
    return logistic(std::log(alpha) + log_f1 - std::log1p(-alpha) - log_f2);
}

inline double allocation_probability(Count x, double alpha, double lambda) {
    return allocation_probability_from_logs(log_pmf_poisson(x, lambda), log_pmf_geometric_mean(x, lambda), alpha);
}

/// (S - 1) ln lambda - n1 lambda - (S2 + n2) ln(1 + lambda), up to a constant.
inline double log_lambda_conditional(double lambda, const AllocationState& state) {
    if (!(lambda > 0.0)) throw DomainError("log_lambda_conditional: lambda must be positive");
    const double S = static_cast<double>(state.S1 + state.S2);
    return (S - 1.0) * std::log(lambda) - static_cast<double>(state.n1) * lambda -
           static_cast<double>(state.S2 + static_cast<Count>(state.n2)) * std::log1p(lambda);
}

/// The lambda conditional is integrable exactly when some observation is positive.
inline bool lambda_conditional_is_proper(const AllocationState& state) noexcept {
    return state.S1 + state.S2 >= 1;
}

namespace detail {

inline void require_nondegenerate(const CountDataset& data, const char* who) {
    if (data.all_zero())
        throw DegeneracyError(std::string(who) +
                              ": all observations are zero; the 1/lambda prior leaves the posterior improper");
}

/// Robbins-Monro step on the log proposal scale.
inline double adapt_log_sd(double log_sd, bool accepted, double target, std::size_t t) {
    const double gain = std::pow(static_cast<double>(t) + 1.0, -0.6);
    return std::clamp(log_sd + gain * ((accepted ? 1.0 : 0.0) - target), -12.0, 5.0);
}

inline void attach_acceptance_warning(MixtureChain& chain) {
    if (chain.mh_acceptance_rate < 0.05 || chain.mh_acceptance_rate > 0.95)
        chain.warnings.push_back("Metropolis acceptance rate " + std::to_string(chain.mh_acceptance_rate) +
                                 " outside [0.05, 0.95] after adaptation");
}

inline double clamp_open_unit(double p) noexcept {
    return std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0 - 0x1.0p-53);
}

} // namespace detail

inline MixtureChain run_gibbs(const CountDataset& data, const MixtureSpec& spec, const McmcConfig& config,
                              RngSeed seed) {
    detail::require_nondegenerate(data, "run_gibbs");
    config.validate();
    Rng rng(seed);

    // Allocation log-odds only depend on the distinct value v:
    // ln alpha - ln(1 - alpha) - lambda - ln v! + (v + 1) ln(1 + lambda).
    std::vector<Count> distinct;
    std::vector<double> distinct_log_fact;
    for (const auto& [v, c] : data.distinct()) {
        distinct.push_back(v);
        distinct_log_fact.push_back(log_factorial(v));
    }
    std::vector<std::size_t> slot(data.n());
    for (std::size_t i = 0; i < data.n(); ++i)
        slot[i] = static_cast<std::size_t>(
            std::lower_bound(distinct.begin(), distinct.end(), data.values()[i]) - distinct.begin());
    std::vector<double> p_poisson(distinct.size());

    double alpha = sample_beta(spec.a0, spec.a0, rng);
    double lambda = data.mean();
    double log_sd = std::log(config.initial_proposal_sd);

    AllocationState state;
    state.z.assign(data.n(), Component::poisson);

    MixtureChain chain;
    chain.iterations = config.iterations;
    chain.burn_in = config.burn_in;
    chain.seed = seed;
    chain.alpha_draws.reserve(config.iterations - config.burn_in);
    chain.lambda_draws.reserve(config.iterations - config.burn_in);
    std::size_t accepted_after_burn_in = 0;

    for (std::size_t t = 0; t < config.iterations; ++t) {
        // z | alpha, lambda
        const double base = std::log(alpha) - std::log1p(-alpha) - lambda;
        const double log1p_lambda = std::log1p(lambda);
        for (std::size_t k = 0; k < distinct.size(); ++k)
            p_poisson[k] = logistic(base - distinct_log_fact[k] + static_cast<double>(distinct[k] + 1) * log1p_lambda);
        state.n1 = state.n2 = 0;
        state.S1 = state.S2 = 0;
        for (std::size_t i = 0; i < data.n(); ++i) {
            const Count x = data.values()[i];
            if (rng.uniform() < p_poisson[slot[i]]) {
                state.z[i] = Component::poisson;
                ++state.n1;
                state.S1 += x;
            } else {
                state.z[i] = Component::geometric;
                ++state.n2;
                state.S2 += x;
            }
        }

        // alpha | z
        const auto beta = conditional_alpha(state, spec.a0);
        alpha = sample_beta(beta.a, beta.b, rng);

        // lambda | z, random walk on u = ln lambda (Jacobian adds u)
        const double u = std::log(lambda);
        const double u_new = u + std::exp(log_sd) * sample_normal(0.0, 1.0, rng);
        const double lambda_new = std::exp(u_new);
        bool accepted = false;
        if (lambda_new > 0.0 && std::isfinite(lambda_new)) {
            const double log_ratio = log_lambda_conditional(lambda_new, state) + u_new -
                                     log_lambda_conditional(lambda, state) - u;
            accepted = std::log(rng.uniform()) < log_ratio;
        }
        if (accepted) lambda = lambda_new;

        if (t < config.burn_in) {
            if (config.adapt) log_sd = detail::adapt_log_sd(log_sd, accepted, config.target_acceptance, t);
        } else {
            accepted_after_burn_in += accepted ? 1 : 0;
            chain.alpha_draws.push_back(alpha);
            chain.lambda_draws.push_back(lambda);
        }
    }
    chain.mh_acceptance_rate =
        static_cast<double>(accepted_after_burn_in) / static_cast<double>(config.iterations - config.burn_in);
    chain.final_proposal_sd = std::exp(log_sd);
    chain.final_state = std::move(state);
    detail::attach_acceptance_warning(chain);
    return chain;
}

/// Allocation-free log posterior on (eta, u) = (logit alpha, ln lambda),
/// Jacobians included.
class MarginalMixturePosterior {
public:
    MarginalMixturePosterior(const CountDataset& data, double a0) : a0_(a0) {
        for (const auto& [v, c] : data.distinct()) {
            values_.push_back(static_cast<double>(v));
            counts_.push_back(static_cast<double>(c));
            log_fact_.push_back(log_factorial(v));
        }
    }

    double operator()(double eta, double u) const {
        const double log_alpha = -softplus(-eta);
        const double log_1m_alpha = -softplus(eta);
        const double lambda = std::exp(u);
        const double log1p_lambda = softplus(u);
        double acc = a0_ * (log_alpha + log_1m_alpha);
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const double lf1 = values_[k] * u - lambda - log_fact_[k];
            const double lf2 = values_[k] * u - (values_[k] + 1.0) * log1p_lambda;
            acc += counts_[k] * log_add_exp(log_alpha + lf1, log_1m_alpha + lf2);
        }
        return acc;
    }

private:
    double a0_;
    std::vector<double> values_, counts_, log_fact_;
};

/// Component-wise random-walk Metropolis on (logit alpha, ln lambda), each
/// coordinate with its own adapted scale. The reported acceptance rate is the
/// average over both coordinates.
inline MixtureChain run_marginal_mh(const CountDataset& data, const MixtureSpec& spec, const McmcConfig& config,
                                    RngSeed seed) {
    detail::require_nondegenerate(data, "run_marginal_mh");
    config.validate();
    Rng rng(seed);
    const MarginalMixturePosterior log_post(data, spec.a0);

    double eta = logit(detail::clamp_open_unit(sample_beta(spec.a0, spec.a0, rng)));
    double u = std::log(data.mean());
    double current = log_post(eta, u);
    double log_sd[2] = {std::log(config.initial_proposal_sd), std::log(config.initial_proposal_sd)};

    MixtureChain chain;
    chain.iterations = config.iterations;
    chain.burn_in = config.burn_in;
    chain.seed = seed;
    chain.alpha_draws.reserve(config.iterations - config.burn_in);
    chain.lambda_draws.reserve(config.iterations - config.burn_in);
    std::size_t accepted_after_burn_in = 0;

    for (std::size_t t = 0; t < config.iterations; ++t) {
        for (int coord = 0; coord < 2; ++coord) {
            const double step = std::exp(log_sd[coord]) * sample_normal(0.0, 1.0, rng);
            const double eta_new = coord == 0 ? eta + step : eta;
            const double u_new = coord == 1 ? u + step : u;
            const double proposed = log_post(eta_new, u_new);
            const bool accepted = std::isfinite(proposed) && std::log(rng.uniform()) < proposed - current;
            if (accepted) {
                eta = eta_new;
                u = u_new;
                current = proposed;
            }
            if (t < config.burn_in) {
                if (config.adapt)
                    log_sd[coord] = detail::adapt_log_sd(log_sd[coord], accepted, config.target_acceptance, t);
            } else {
                accepted_after_burn_in += accepted ? 1 : 0;
            }
        }
        if (t >= config.burn_in) {
            chain.alpha_draws.push_back(detail::clamp_open_unit(logistic(eta)));
            chain.lambda_draws.push_back(std::exp(u));
        }
    }
    chain.mh_acceptance_rate =
        static_cast<double>(accepted_after_burn_in) / (2.0 * static_cast<double>(config.iterations - config.burn_in));
    chain.final_proposal_sd = std::exp(0.5 * (log_sd[0] + log_sd[1]));
    detail::attach_acceptance_warning(chain);
    return chain;
}

struct GridConfig {
    std::size_t alpha_cells = 200;
    QuadratureConfig lambda_quadrature{};
};

/// Marginal posterior of alpha as a finite Beta mixture
///   sum_k weight_k Beta(k + a0, n - k + a0),
/// together with a discretisation on a uniform alpha grid.
struct DiscretizedPosterior {
    std::vector<double> component_weights;  // indexed by k = number of Poisson allocations
    double a0 = 0.5;
    std::size_t n = 0;

    std::vector<double> edges;      // alpha_cells + 1 points, 0 .. 1
    std::vector<double> midpoints;
    std::vector<double> cell_mass;  // posterior mass per cell
    std::vector<double> density;    // density at midpoints
    double mean = 0.0;
    double median = 0.0;

    double cdf(double alpha) const {
        if (alpha <= 0.0) return 0.0;
        if (alpha >= 1.0) return 1.0;
        double acc = 0.0;
        for (std::size_t k = 0; k < component_weights.size(); ++k) {
            if (component_weights[k] == 0.0) continue;
            acc += component_weights[k] *
                   boost::math::ibeta(static_cast<double>(k) + a0, static_cast<double>(n - k) + a0, alpha);
        }
        return std::clamp(acc, 0.0, 1.0);
    }

    double pdf(double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) return 0.0;
        double acc = 0.0;
        for (std::size_t k = 0; k < component_weights.size(); ++k) {
            if (component_weights[k] == 0.0) continue;
            acc += component_weights[k] *
                   std::exp(log_pdf_beta(alpha, static_cast<double>(k) + a0, static_cast<double>(n - k) + a0));
        }
        return acc;
    }

    double quantile(double p) const {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("DiscretizedPosterior::quantile: p outside [0, 1]");
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

namespace detail {

/// ln of the coefficients c_k of prod_i (e^{lf2_i} + e^{lf1_i} t), i.e. the
/// weight of alpha^k (1 - alpha)^{n-k} in the mixture likelihood.
inline std::vector<double> log_bernstein_coefficients(std::span<const double> lf1, std::span<const double> lf2) {
    std::vector<double> c{1.0};
    double log_scale = 0.0;
    for (std::size_t i = 0; i < lf1.size(); ++i) {
        const double m = std::max(lf1[i], lf2[i]);
        const double a = std::exp(lf2[i] - m);
        const double b = std::exp(lf1[i] - m);
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k] += a * c[k];
            next[k + 1] += b * c[k];
        }
        const double top = *std::max_element(next.begin(), next.end());
        for (double& v : next) v /= top;
        log_scale += m + std::log(top);
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        out[k] = c[k] > 0.0 ? std::log(c[k]) + log_scale : -std::numeric_limits<double>::infinity();
    return out;
}

} // namespace detail

/// Deterministic alpha posterior. For fixed lambda the mixture likelihood is a
/// polynomial in alpha with non-negative Bernstein coefficients, so the alpha
/// integral is a sum of Beta functions and is exact. The remaining integral
/// over u = ln lambda uses the bracketed Gauss-Legendre rule, refined until the
/// normalising constant is stable. With no observations the result is the
/// Beta(a0, a0) prior.
inline DiscretizedPosterior grid_posterior_alpha(std::span<const Count> values, const MixtureSpec& spec,
                                                 const GridConfig& grid = {}) {
    const double a0 = spec.a0;
    const std::size_t n = values.size();
    Count S = 0;
    for (Count v : values) {
        if (v < 0) throw DomainError("grid_posterior_alpha: negative count");
        S += v;
    }
    if (n > 0 && S == 0)
        throw DegeneracyError("grid_posterior_alpha: all observations are zero; the 1/lambda prior is improper here");

    DiscretizedPosterior post;
    post.a0 = a0;
    post.n = n;

    if (n == 0) {
        post.component_weights = {1.0};
    } else {
        std::vector<double> log_fact(n);
        for (std::size_t i = 0; i < n; ++i) log_fact[i] = log_factorial(values[i]);
        std::vector<double> log_beta_k(n + 1);
        const double log_prior_norm = log_beta(a0, a0);
        for (std::size_t k = 0; k <= n; ++k)
            log_beta_k[k] = log_beta(static_cast<double>(k) + a0, static_cast<double>(n - k) + a0) - log_prior_norm;

        std::vector<double> lf1(n), lf2(n);
        // Per-k log integrand at u; the 1/lambda prior cancels the Jacobian.
        auto terms_at = [&](double u) {
            const double lambda = std::exp(u);
            const double l1p = softplus(u);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = static_cast<double>(values[i]);
                lf1[i] = x * u - lambda - log_fact[i];
                lf2[i] = x * u - (x + 1.0) * l1p;
            }
            auto t = detail::log_bernstein_coefficients(lf1, lf2);
            for (std::size_t k = 0; k <= n; ++k) t[k] += log_beta_k[k];
            return t;
        };
        auto log_total = [&](double u) {
            const auto t = terms_at(u);
            return log_sum_exp(t);
        };

        const auto& qc = grid.lambda_quadrature;
        const Bracket br = bracket_log_integrand(log_total, std::log(static_cast<double>(S) / n), qc);
        const auto rule = gauss_legendre(qc.nodes_per_panel);
        int panels = qc.initial_panels;

        auto integrate_terms = [&](int p) {
            const auto nodes = composite_nodes(br.lo, br.hi, p, rule);
            std::vector<std::vector<double>> per_k(n + 1, std::vector<double>(nodes.x.size()));
            for (std::size_t j = 0; j < nodes.x.size(); ++j) {
                const auto t = terms_at(nodes.x[j]);
                for (std::size_t k = 0; k <= n; ++k) per_k[k][j] = nodes.log_w[j] + t[k];
            }
            std::vector<double> logs(n + 1);
            for (std::size_t k = 0; k <= n; ++k) logs[k] = log_sum_exp(per_k[k]);
            return logs;
        };

        auto prev = integrate_terms(panels);
        std::vector<double> cur;
        bool converged = false;
        for (int r = 0; r < qc.max_refinements; ++r) {
            panels *= 2;
            cur = integrate_terms(panels);
            if (std::fabs(log_sum_exp(cur) - log_sum_exp(prev)) <= qc.tolerance) {
                converged = true;
                break;
            }
            prev = cur;
        }
        if (!converged) throw AccuracyError("grid_posterior_alpha: lambda quadrature did not converge", log_sum_exp(cur));

        const double total = log_sum_exp(cur);
        post.component_weights.resize(n + 1);
        for (std::size_t k = 0; k <= n; ++k) post.component_weights[k] = std::exp(cur[k] - total);
    }

    for (std::size_t k = 0; k < post.component_weights.size(); ++k)
        post.mean += post.component_weights[k] * (static_cast<double>(k) + a0) / (static_cast<double>(n) + 2.0 * a0);

    const std::size_t cells = std::max<std::size_t>(grid.alpha_cells, 1);
    post.edges.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) post.edges[i] = static_cast<double>(i) / static_cast<double>(cells);
    std::vector<double> edge_cdf(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) edge_cdf[i] = post.cdf(post.edges[i]);
    double mass = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double mid = 0.5 * (post.edges[i] + post.edges[i + 1]);
        post.midpoints.push_back(mid);
        post.cell_mass.push_back(edge_cdf[i + 1] - edge_cdf[i]);
        post.density.push_back(post.pdf(mid));
        mass += post.cell_mass.back();
    }
    if (std::fabs(mass - 1.0) > 1e-8)
        throw AccuracyError("grid_posterior_alpha: cell masses do not sum to one", mass);
    post.median = post.quantile(0.5);
    return post;
}

inline DiscretizedPosterior grid_posterior_alpha(const CountDataset& data, const MixtureSpec& spec,
                                                 const GridConfig& grid = {}) {
    return grid_posterior_alpha(data.values(), spec, grid);
}

struct ParameterSummary {
    double mean = 0.0;
    double median = 0.0;
    std::vector<std::pair<double, double>> quantiles;  // (probability, value)
};

struct SummaryTable {
    ParameterSummary alpha;
    ParameterSummary lambda;
    std::size_t draws = 0;
};

inline ParameterSummary summarize_draws(std::span<const double> draws, std::span<const double> probs) {
    if (draws.empty()) throw DomainError("posterior_summary: empty chain");
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    ParameterSummary s;
    s.mean = mean_of(draws);
    s.median = quantile_sorted(sorted, 0.5);
    for (double p : probs) s.quantiles.emplace_back(p, quantile_sorted(sorted, p));
    return s;
}

inline SummaryTable posterior_summary(const MixtureChain& chain, std::span<const double> quantiles) {
    if (chain.alpha_draws.empty()) throw DomainError("posterior_summary: empty chain");
    SummaryTable t;
    t.alpha = summarize_draws(chain.alpha_draws, quantiles);
    t.lambda = summarize_draws(chain.lambda_draws, quantiles);
    t.draws = chain.alpha_draws.size();
    return t;
}

} // namespace bayes_arbiter
