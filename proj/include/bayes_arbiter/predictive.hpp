#pragma once

// Predictive calibration of decision statistics.
//
// predictive_bf_tails estimates
//     p0 = P_0(B01(X) >= B01(x_obs))   and   p1 = P_1(B01(X) <= B01(x_obs)),
// with X drawn from the prior or the posterior predictive of model 0
// (resp. 1). Ties always count towards the tail. Replicate r of model m uses
// the stream seed.child({m, r}), so results do not depend on thread count.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "evidence.hpp"
#include "mixture.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace bayes_arbiter {

enum class PredictiveMode { prior, posterior };

inline std::string_view to_string(PredictiveMode m) { return m == PredictiveMode::prior ? "prior" : "posterior"; }

inline double binomial_se(double p, std::size_t n) {
    return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

/// A sampling model able to generate replicates. Either parameter sampler
/// may be left empty (an improper prior has no prior draws).
template <class Data, class Param>
struct PredictiveModel {
    std::string name;
    std::function<Param(Rng&)> draw_prior;
    std::function<Param(const Data& observed, Rng&)> draw_posterior;
    /// Replicate with the same size as `like`.
    std::function<Data(const Param&, const Data& like, Rng&)> simulate;
};

struct CalibrationReport {
    double p0 = 0.0;
    double p1 = 0.0;
    std::size_t n_rep = 0;
    double mc_se0 = 0.0;
    double mc_se1 = 0.0;
    PredictiveMode mode = PredictiveMode::posterior;
    std::string statistic;               // e.g. "log_bf10_normal" or "log_bf12_shared_improper"
    std::size_t degenerate_redraws = 0;  // replicates redrawn because the statistic was undefined
};

struct TailEstimate {
    double p = 0.0;
    double mc_se = 0.0;
    std::size_t n_rep = 0;
};

namespace detail {

template <class Data, class Param>
Param draw_parameter(const PredictiveModel<Data, Param>& model, const Data& observed, PredictiveMode mode,
                     Rng& rng) {
    if (mode == PredictiveMode::prior) {
        if (!model.draw_prior)
            throw DomainError("model '" + model.name +
                              "' has no prior sampler (improper prior); attach draw_prior or use posterior mode");
        return model.draw_prior(rng);
    }
    if (!model.draw_posterior)
        throw DomainError("model '" + model.name +
                          "' has no posterior sampler; attach draw_posterior (e.g. a conjugate or MCMC sampler)");
    return model.draw_posterior(observed, rng);
}

/// Draws one replicate statistic, redrawing while the statistic is undefined.
template <class Data, class Param>
double replicate_statistic(const PredictiveModel<Data, Param>& model, const Data& observed, PredictiveMode mode,
                           const std::function<double(const Data&)>& statistic, Rng& rng, std::size_t& redraws) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Param theta = draw_parameter(model, observed, mode, rng);
        const Data rep = model.simulate(theta, observed, rng);
        try {
            return statistic(rep);
        } catch (const DegeneracyError&) {
            ++redraws;
        }
    }
    throw DegeneracyError("predictive: statistic undefined on 1000 consecutive replicates of model '" + model.name +
                          "'");
}

} // namespace detail

template <class Data, class Param>
CalibrationReport predictive_bf_tails(const Data& observed, const PredictiveModel<Data, Param>& model0,
                                      const PredictiveModel<Data, Param>& model1,
                                      const std::function<double(const Data&)>& log_bf01, PredictiveMode mode,
                                      std::size_t n_rep, RngSeed seed, std::string statistic_label = "log_bf01") {
    if (n_rep < 100) throw DomainError("predictive_bf_tails: n_rep must be at least 100");
    const double observed_stat = log_bf01(observed);
    std::vector<unsigned char> hit0(n_rep), hit1(n_rep);
    std::vector<std::size_t> redraw0(n_rep), redraw1(n_rep);
    parallel_for(n_rep, [&](std::size_t r) {
        Rng rng0(seed.child({0, r}));
        hit0[r] = detail::replicate_statistic(model0, observed, mode, log_bf01, rng0, redraw0[r]) >= observed_stat;
        Rng rng1(seed.child({1, r}));
        hit1[r] = detail::replicate_statistic(model1, observed, mode, log_bf01, rng1, redraw1[r]) <= observed_stat;
    });
    CalibrationReport rep;
    rep.n_rep = n_rep;
    rep.mode = mode;
    rep.statistic = std::move(statistic_label);
    std::size_t c0 = 0, c1 = 0;
    for (std::size_t r = 0; r < n_rep; ++r) {
        c0 += hit0[r];
        c1 += hit1[r];
        rep.degenerate_redraws += redraw0[r] + redraw1[r];
    }
    rep.p0 = static_cast<double>(c0) / static_cast<double>(n_rep);
    rep.p1 = static_cast<double>(c1) / static_cast<double>(n_rep);
    rep.mc_se0 = binomial_se(rep.p0, n_rep);
    rep.mc_se1 = binomial_se(rep.p1, n_rep);
    return rep;
}

/// Tails of B01(X) under the single encompassing predictive
/// weights[0] * P_0 + weights[1] * P_1. The weights are the caller's model prior
/// (or posterior) probabilities; the result depends on them.
struct EncompassingTails {
    TailEstimate upper;  // P(B01(X) >= observed)
    TailEstimate lower;  // P(B01(X) <= observed)
};

template <class Data, class Param>
EncompassingTails encompassing_bf_tails(const Data& observed, const PredictiveModel<Data, Param>& model0,
                                        const PredictiveModel<Data, Param>& model1, const ModelWeights& weights,
                                        const std::function<double(const Data&)>& log_bf01, PredictiveMode mode,
                                        std::size_t n_rep, RngSeed seed) {
    if (weights.size() != 2) throw DomainError("encompassing_bf_tails: two model weights required");
    if (n_rep < 100) throw DomainError("encompassing_bf_tails: n_rep must be at least 100");
    const double observed_stat = log_bf01(observed);
    std::vector<double> stats(n_rep);
    std::vector<std::size_t> redraws(n_rep);
    parallel_for(n_rep, [&](std::size_t r) {
        Rng rng(seed.child({2, r}));
        const bool pick0 = rng.uniform() < weights.values()[0];
        stats[r] = detail::replicate_statistic(pick0 ? model0 : model1, observed, mode, log_bf01, rng, redraws[r]);
    });
    std::size_t up = 0, down = 0;
    for (double s : stats) {
        up += s >= observed_stat;
        down += s <= observed_stat;
    }
    EncompassingTails out;
    out.upper = {static_cast<double>(up) / n_rep, 0.0, n_rep};
    out.lower = {static_cast<double>(down) / n_rep, 0.0, n_rep};
    out.upper.mc_se = binomial_se(out.upper.p, n_rep);
    out.lower.mc_se = binomial_se(out.lower.p, n_rep);
    return out;
}

// Normal point-null testbed, parameter = theta.

inline PredictiveModel<NormalSummary, double> normal_null_model() {
    PredictiveModel<NormalSummary, double> m;
    m.name = "H0";
    m.draw_prior = [](Rng&) { return 0.0; };
    m.draw_posterior = [](const NormalSummary&, Rng&) { return 0.0; };
    m.simulate = [](const double& theta, const NormalSummary& like, Rng& rng) {
        const double se = like.sigma / std::sqrt(static_cast<double>(like.n));
        return NormalSummary(like.n, sample_normal(like.theta0 + theta * like.sigma, se, rng), like.theta0,
                             like.sigma);
    };
    return m;
}

/// theta in standardized units: prior N(0, 1), posterior N(n z / (n + 1), 1 / (n + 1)).
inline PredictiveModel<NormalSummary, double> normal_alternative_model() {
    auto m = normal_null_model();
    m.name = "H1";
    m.draw_prior = [](Rng& rng) { return sample_normal(0.0, 1.0, rng); };
    m.draw_posterior = [](const NormalSummary& obs, Rng& rng) {
        const double n = static_cast<double>(obs.n);
        return sample_normal(n * obs.standardized() / (n + 1.0), 1.0 / std::sqrt(n + 1.0), rng);
    };
    return m;
}

// Count testbed under the 1/lambda prior, parameter = lambda. No prior
// sampler exists; the posteriors are conjugate.

/// lambda | x ~ Gamma(S, n) for Poisson data.
inline double sample_poisson_posterior_lambda(const CountDataset& data, Rng& rng) {
    if (data.all_zero()) throw DegeneracyError("Poisson posterior under 1/lambda is improper for all-zero data");
    return sample_gamma(static_cast<double>(data.sum()), static_cast<double>(data.n()), rng);
}

/// lambda / (1 + lambda) | x ~ Beta(S, n) for Geometric data.
inline double sample_geometric_posterior_lambda(const CountDataset& data, Rng& rng) {
    if (data.all_zero()) throw DegeneracyError("Geometric posterior under 1/lambda is improper for all-zero data");
    const double p = sample_beta(static_cast<double>(data.sum()), static_cast<double>(data.n()), rng);
    return p / (1.0 - p);
}

inline CountDataset simulate_counts(CountFamily family, double lambda, std::size_t n, Rng& rng) {
    if (n == 0) throw DomainError("simulate_counts: n must be at least 1");
    std::vector<Count> xs(n);
    for (auto& x : xs)
        x = family == CountFamily::poisson ? sample_poisson(lambda, rng) : sample_geometric_mean(lambda, rng);
    return CountDataset(std::move(xs));
}

inline PredictiveModel<CountDataset, double> count_model(CountFamily family) {
    PredictiveModel<CountDataset, double> m;
    m.name = std::string(to_string(family));
    m.draw_posterior = family == CountFamily::poisson ? sample_poisson_posterior_lambda
                                                      : sample_geometric_posterior_lambda;
    m.simulate = [family](const double& lambda, const CountDataset& like, Rng& rng) {
        return simulate_counts(family, lambda, like.n(), rng);
    };
    return m;
}

/// Replicate r picks a posterior draw uniformly, then simulates n_obs values.
inline std::vector<CountDataset> posterior_predictive_replicate(std::span<const double> posterior_draws,
                                                                CountFamily family, std::size_t n_obs,
                                                                std::size_t n_rep, RngSeed seed) {
    if (posterior_draws.empty()) throw DomainError("posterior_predictive_replicate: no posterior draws");
    std::vector<std::optional<CountDataset>> slots(n_rep);
    parallel_for(n_rep, [&](std::size_t r) {
        Rng rng(seed.child({3, r}));
        const auto idx = std::min(posterior_draws.size() - 1,
                                  static_cast<std::size_t>(rng.uniform() * static_cast<double>(posterior_draws.size())));
        slots[r].emplace(simulate_counts(family, posterior_draws[idx], n_obs, rng));
    });
    std::vector<CountDataset> out;
    out.reserve(n_rep);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

using Discrepancy = std::function<double(const CountDataset&, double theta)>;

namespace discrepancy {

inline double sample_mean(const CountDataset& d, double) { return d.mean(); }

inline double sample_variance(const CountDataset& d, double) {
    std::vector<double> xs(d.values().begin(), d.values().end());
    return variance_of(xs);
}

inline double maximum(const CountDataset& d, double) {
    return static_cast<double>(*std::max_element(d.values().begin(), d.values().end()));
}

inline double zero_count(const CountDataset& d, double) {
    return static_cast<double>(std::count(d.values().begin(), d.values().end(), Count{0}));
}

} // namespace discrepancy

/// P(T(X_rep, theta) >= T(x_obs, theta) | x_obs), ties included.
inline TailEstimate posterior_predictive_pvalue(const CountDataset& observed, std::span<const double> posterior_draws,
                                                CountFamily family, const Discrepancy& T, std::size_t n_rep,
                                                RngSeed seed) {
    if (posterior_draws.empty()) throw DomainError("posterior_predictive_pvalue: no posterior draws");
    if (n_rep == 0) throw DomainError("posterior_predictive_pvalue: n_rep must be positive");
    std::vector<unsigned char> hit(n_rep);
    parallel_for(n_rep, [&](std::size_t r) {
        Rng rng(seed.child({4, r}));
        const auto idx = std::min(posterior_draws.size() - 1,
                                  static_cast<std::size_t>(rng.uniform() * static_cast<double>(posterior_draws.size())));
        const double theta = posterior_draws[idx];
        const auto rep = simulate_counts(family, theta, observed.n(), rng);
        hit[r] = T(rep, theta) >= T(observed, theta);
    });
    std::size_t c = 0;
    for (auto h : hit) c += h;
    TailEstimate out;
    out.n_rep = n_rep;
    out.p = static_cast<double>(c) / static_cast<double>(n_rep);
    out.mc_se = binomial_se(out.p, n_rep);
    return out;
}

enum class AlphaSummary { mean, median };

inline std::string_view to_string(AlphaSummary s) { return s == AlphaSummary::mean ? "mean" : "median"; }

struct BootstrapCutoff {
    double cutoff = 0.0;
    double q = 0.0;
    std::vector<double> summaries;  // replica order
    std::vector<double> sorted;
    std::size_t degenerate_redraws = 0;

    /// Cutoff for another q on the same replica set.
    double cutoff_at(double p) const { return quantile_sorted(sorted, p); }
};

/// Parametric bootstrap of an alpha posterior summary under a generating model.
inline BootstrapCutoff bootstrap_alpha_cutoff(const MixtureSpec& spec, CountFamily generator, double lambda_true,
                                              std::size_t n_obs, std::size_t replicas, const McmcConfig& mcmc,
                                              AlphaSummary summary, double q, RngSeed seed) {
    if (replicas < 20) throw DomainError("bootstrap_alpha_cutoff: at least 20 replicas required");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("bootstrap_alpha_cutoff: q outside [0, 1]");
    if (!(lambda_true > 0.0)) throw DomainError("bootstrap_alpha_cutoff: lambda must be positive");
    if (n_obs == 0) throw DomainError("bootstrap_alpha_cutoff: n_obs must be positive");
    mcmc.validate();

    BootstrapCutoff out;
    out.q = q;
    out.summaries.resize(replicas);
    std::vector<std::size_t> redraws(replicas, 0);
    parallel_for(replicas, [&](std::size_t r) {
        Rng rng(seed.child({5, r}));
        CountDataset data = simulate_counts(generator, lambda_true, n_obs, rng);
        while (data.all_zero()) {
            ++redraws[r];
            data = simulate_counts(generator, lambda_true, n_obs, rng);
        }
        const auto chain = run_gibbs(data, spec, mcmc, seed.child({6, r}));
        out.summaries[r] = summary == AlphaSummary::mean ? mean_of(chain.alpha_draws) : median_of(chain.alpha_draws);
    });
    for (auto c : redraws) out.degenerate_redraws += c;
    out.sorted = out.summaries;
    std::sort(out.sorted.begin(), out.sorted.end());
    out.cutoff = quantile_sorted(out.sorted, q);
    return out;
}

} // namespace bayes_arbiter
