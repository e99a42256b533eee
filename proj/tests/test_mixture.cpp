#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bayes_arbiter/distributions.hpp"
#include "bayes_arbiter/mixture.hpp"

using namespace bayes_arbiter;

namespace {

CountDataset poisson_sample(std::size_t n, double mean, RngSeed seed) {
    Rng rng(seed);
    std::vector<Count> xs(n);
    for (auto& x : xs) x = sample_poisson(mean, rng);
    return CountDataset(std::move(xs));
}

const CountDataset& pinned_n20() {
    static const CountDataset d = poisson_sample(20, 4.0, {2024, 0});
    return d;
}

McmcConfig long_run() {
    McmcConfig c;
    c.iterations = 60000;
    c.burn_in = 10000;
    return c;
}

} // namespace

TEST(ConditionalAlpha, ConjugateUpdate) {
    EXPECT_EQ(conditional_alpha(AllocationState::from_counts(0, 0, 0, 0), 0.5), (BetaParameters{0.5, 0.5}));
    const auto b = conditional_alpha(AllocationState::from_counts(3, 9, 7, 20), 0.5);
    EXPECT_EQ(b, (BetaParameters{3.5, 7.5}));
    EXPECT_NEAR(b.mean(), 3.5 / 11.0, 1e-15);
    EXPECT_THROW(conditional_alpha({}, 0.0), DomainError);
}

TEST(ConditionalAlpha, ExhaustiveSplits) {
    for (double a0 : {0.1, 0.5, 1.0})
        for (std::size_t n1 = 0; n1 <= 30; ++n1)
            for (std::size_t n2 = 0; n1 + n2 <= 30; ++n2) {
                const auto b = conditional_alpha(AllocationState::from_counts(n1, 0, n2, 0), a0);
                EXPECT_EQ(b.a, a0 + double(n1));
                EXPECT_EQ(b.b, a0 + double(n2));
            }
}

TEST(AllocationProbability, Values) {
    EXPECT_NEAR(allocation_probability(0, 0.5, 1.0), 0.42388311523417089, 1e-14);
    EXPECT_NEAR(allocation_probability(10, 0.5, 1.0), 0.00020757845633858215, 1e-15);
    EXPECT_NEAR(allocation_probability_from_logs(-3.2, -3.2, 0.5), 0.5, 1e-15);
    EXPECT_THROW(allocation_probability(1, 0.0, 1.0), DomainError);
    EXPECT_THROW(allocation_probability(1, 1.0, 1.0), DomainError);
}

TEST(LambdaConditional, Values) {
    const auto s = AllocationState::from_counts(1, 1, 0, 0);
    EXPECT_NEAR(log_lambda_conditional(1.0, s), -1.0, 1e-15);
    EXPECT_TRUE(lambda_conditional_is_proper(s));
    const auto degenerate = AllocationState::from_counts(0, 0, 3, 0);
    EXPECT_FALSE(lambda_conditional_is_proper(degenerate));
    EXPECT_GT(log_lambda_conditional(1e-8, degenerate), log_lambda_conditional(1e-4, degenerate));
    EXPECT_THROW(log_lambda_conditional(0.0, s), DomainError);
}

TEST(LambdaConditional, RatiosIgnoreConstants) {
    const auto s = AllocationState::from_counts(4, 13, 6, 31);
    const double r = log_lambda_conditional(3.1, s) - log_lambda_conditional(4.7, s);
    const double direct = (44.0 - 1.0) * std::log(3.1 / 4.7) - 4.0 * (3.1 - 4.7) - 37.0 * std::log(4.1 / 5.7);
    EXPECT_NEAR(r, direct, 1e-12);
}

TEST(Gibbs, DeterministicUnderSeed) {
    McmcConfig cfg;
    cfg.iterations = 3000;
    cfg.burn_in = 500;
    const auto a = run_gibbs(pinned_n20(), MixtureSpec(0.5), cfg, {7, 0});
    const auto b = run_gibbs(pinned_n20(), MixtureSpec(0.5), cfg, {7, 0});
    EXPECT_EQ(a.alpha_draws, b.alpha_draws);
    EXPECT_EQ(a.lambda_draws, b.lambda_draws);
    const auto c = run_gibbs(pinned_n20(), MixtureSpec(0.5), cfg, {7, 1});
    EXPECT_NE(a.alpha_draws, c.alpha_draws);
}

TEST(Gibbs, ChainShapeAndSupport) {
    McmcConfig cfg;
    cfg.iterations = 4000;
    cfg.burn_in = 1000;
    for (double a0 : {0.1, 0.5, 1.0}) {
        const auto chain = run_gibbs(pinned_n20(), MixtureSpec(a0), cfg, {8, 0});
        ASSERT_EQ(chain.alpha_draws.size(), 3000u);
        ASSERT_EQ(chain.lambda_draws.size(), 3000u);
        for (std::size_t i = 0; i < chain.alpha_draws.size(); ++i) {
            ASSERT_GT(chain.alpha_draws[i], 0.0);
            ASSERT_LT(chain.alpha_draws[i], 1.0);
            ASSERT_GT(chain.lambda_draws[i], 0.0);
        }
        EXPECT_GT(chain.mh_acceptance_rate, 0.05);
        EXPECT_LT(chain.mh_acceptance_rate, 0.95);
        EXPECT_TRUE(chain.warnings.empty());
    }
}

TEST(Gibbs, ComponentRolesAreFixed) {
    McmcConfig cfg;
    cfg.iterations = 400;
    cfg.burn_in = 100;
    const auto chain = run_gibbs(pinned_n20(), MixtureSpec(0.5), cfg, {9, 0});
    const auto& s = chain.final_state;
    ASSERT_EQ(s.z.size(), pinned_n20().n());
    const auto recount = AllocationState::from_labels(pinned_n20(), s.z);
    EXPECT_EQ(recount.n1, s.n1);
    EXPECT_EQ(recount.S1, s.S1);
    EXPECT_EQ(recount.n2, s.n2);
    EXPECT_EQ(recount.S2, s.S2);
    EXPECT_EQ(s.n1 + s.n2, pinned_n20().n());
    EXPECT_EQ(s.S1 + s.S2, pinned_n20().sum());
}

TEST(Gibbs, DataFarFromPoissonPullsAlphaDown) {
    // Geometric data: alpha should lean towards 0, i.e. label 2 keeps meaning Geometric.
    Rng rng({10, 0});
    std::vector<Count> xs(300);
    for (auto& x : xs) x = sample_geometric_mean(4.0, rng);
    McmcConfig cfg;
    const auto chain = run_gibbs(CountDataset(xs), MixtureSpec(0.5), cfg, {10, 1});
    EXPECT_LT(median_of(chain.alpha_draws), 0.1);
}

TEST(Gibbs, DegenerateDataRejected) {
    EXPECT_THROW(run_gibbs(CountDataset({0, 0}), MixtureSpec(0.5), {}, {1, 0}), DegeneracyError);
    EXPECT_THROW(run_marginal_mh(CountDataset({0}), MixtureSpec(0.5), {}, {1, 0}), DegeneracyError);
    McmcConfig bad;
    bad.iterations = 10;
    bad.burn_in = 10;
    EXPECT_THROW(run_gibbs(CountDataset({1}), MixtureSpec(0.5), bad, {1, 0}), DomainError);
    EXPECT_THROW(MixtureSpec(0.0), DomainError);
}

TEST(Gibbs, AcceptanceWarningWithoutAdaptation) {
    McmcConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 100;
    cfg.adapt = false;
    cfg.initial_proposal_sd = 50.0;
    const auto chain = run_gibbs(poisson_sample(200, 4.0, {11, 0}), MixtureSpec(0.5), cfg, {11, 1});
    EXPECT_LT(chain.mh_acceptance_rate, 0.05);
    EXPECT_FALSE(chain.warnings.empty());
}

TEST(MarginalMh, DeterministicUnderSeed) {
    McmcConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 500;
    const auto a = run_marginal_mh(pinned_n20(), MixtureSpec(0.5), cfg, {12, 0});
    const auto b = run_marginal_mh(pinned_n20(), MixtureSpec(0.5), cfg, {12, 0});
    EXPECT_EQ(a.alpha_draws, b.alpha_draws);
    EXPECT_EQ(a.lambda_draws, b.lambda_draws);
}

TEST(GridOracle, MatchesTwoDimensionalReference) {
    // Reference posterior means from nested adaptive quadrature over (alpha, lambda) in mpmath.
    EXPECT_NEAR(grid_posterior_alpha(CountDataset({2, 3}), MixtureSpec(1.0)).mean, 0.55319250536775543, 1e-8);
    EXPECT_NEAR(grid_posterior_alpha(CountDataset({2, 3, 0, 7}), MixtureSpec(0.5)).mean, 0.35888778147567487,
                1e-7);
}

TEST(GridOracle, NoObservationsGivesPrior) {
    for (double a0 : {0.5, 1.0, 2.0}) {
        const auto post = grid_posterior_alpha(std::span<const Count>{}, MixtureSpec(a0));
        for (std::size_t i = 0; i < post.midpoints.size(); ++i)
            EXPECT_NEAR(post.density[i], std::exp(log_pdf_beta(post.midpoints[i], a0, a0)), 1e-6);
        EXPECT_NEAR(post.mean, 0.5, 1e-12);
        EXPECT_NEAR(post.median, 0.5, 1e-9);
    }
}

TEST(GridOracle, NormalizedWithInteriorSummaries) {
    const auto post = grid_posterior_alpha(pinned_n20(), MixtureSpec(0.5));
    double mass = 0.0, weights = 0.0;
    for (double m : post.cell_mass) mass += m;
    for (double w : post.component_weights) weights += w;
    EXPECT_NEAR(mass, 1.0, 1e-8);
    EXPECT_NEAR(weights, 1.0, 1e-12);
    EXPECT_GT(post.mean, 0.0);
    EXPECT_LT(post.mean, 1.0);
    EXPECT_GT(post.median, 0.0);
    EXPECT_LT(post.median, 1.0);
    EXPECT_LE(post.quantile(0.1), post.median);
    EXPECT_LE(post.median, post.quantile(0.9));
    EXPECT_THROW(grid_posterior_alpha(CountDataset({0, 0}), MixtureSpec(0.5)), DegeneracyError);
}

TEST(SamplerAgreement, GibbsMarginalMhAndGrid) {
    const auto& d = pinned_n20();
    const double grid = grid_posterior_alpha(d, MixtureSpec(0.5)).mean;
    const auto gibbs = run_gibbs(d, MixtureSpec(0.5), long_run(), {2024, 1});
    const auto mh = run_marginal_mh(d, MixtureSpec(0.5), long_run(), {2024, 2});
    const double mg = mean_of(gibbs.alpha_draws), mm = mean_of(mh.alpha_draws);
    EXPECT_NEAR(mg, grid, 0.02);
    EXPECT_NEAR(mm, grid, 0.02);
    EXPECT_NEAR(mg, mm, 0.02);
}

TEST(SamplerAgreement, MixedDataFromFiftyFiftyMixture) {
    // lambda fixed at 3, data drawn half Poisson and half Geometric
    Rng rng({15, 0});
    std::vector<Count> xs(40);
    for (auto& x : xs) x = rng.uniform() < 0.5 ? sample_poisson(3.0, rng) : sample_geometric_mean(3.0, rng);
    const CountDataset d(xs);
    const double grid = grid_posterior_alpha(d, MixtureSpec(1.0)).mean;
    const auto mh = run_marginal_mh(d, MixtureSpec(1.0), long_run(), {15, 1});
    EXPECT_NEAR(mean_of(mh.alpha_draws), grid, 0.02);
}

TEST(PosteriorSummary, Examples) {
    MixtureChain constant;
    constant.alpha_draws.assign(50, 0.7);
    constant.lambda_draws.assign(50, 4.0);
    const std::vector<double> qs{0.1, 0.5, 0.9};
    auto t = posterior_summary(constant, qs);
    EXPECT_NEAR(t.alpha.mean, 0.7, 1e-15);
    EXPECT_EQ(t.alpha.median, 0.7);

    MixtureChain ladder;
    for (int i = 1; i <= 9; ++i) {
        ladder.alpha_draws.push_back(i / 10.0);
        ladder.lambda_draws.push_back(double(i));
    }
    t = posterior_summary(ladder, qs);
    EXPECT_NEAR(t.alpha.median, 0.5, 1e-15);
    EXPECT_LE(t.alpha.quantiles[0].second, t.alpha.quantiles[1].second);
    EXPECT_LE(t.alpha.quantiles[1].second, t.alpha.quantiles[2].second);
    EXPECT_EQ(t.lambda.median, 5.0);

    EXPECT_THROW(posterior_summary(MixtureChain{}, qs), DomainError);
}

TEST(Concentration, LargePoissonSampleFavoursPoissonComponent) {
    const auto d = poisson_sample(1000, 4.0, {16, 0});
    const auto chain = run_gibbs(d, MixtureSpec(0.5), {}, {16, 1});
    EXPECT_GT(median_of(chain.alpha_draws), 0.9);
}
