// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bayes_arbiter.hpp"

#ifndef BAYES_ARBITER_CLI_PATH
#error "BAYES_ARBITER_CLI_PATH must name the command-line binary"
#endif

namespace fs = std::filesystem;
using namespace bayes_arbiter;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;  // 0 = no runtime budget
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CountDataset simulate(CountFamily family, double mean, std::size_t n, Rng& rng) {
    for (;;) {
        auto d = simulate_counts(family, mean, n, rng);
        if (!d.all_zero()) return d;
    }
}

// 1. log B10(n, xbar) + log B01(n, sqrt(n)|xbar|) = 0.
//    An absolute 1e-12 is below one ulp once |log B| exceeds a few thousand
//    (n = 1e6, |xbar| = 5 gives |log B| ~ 1.2e7), so the tolerance is scaled by
//    max(1, |log B10|); the raw absolute error is reported alongside.
Outcome reciprocal_identity() {
    Rng rng({101, 0});
    double worst_abs = 0.0, worst_scaled = 0.0;
    std::size_t over_abs = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto n = std::min<std::size_t>(1000000, 1 + static_cast<std::size_t>(rng.uniform() * 1e6));
        const double xbar = -5.0 + 10.0 * rng.uniform();
        const double b10 = log_bf10_normal(NormalSummary(n, xbar)).log_bf;
        const double b01 = log_bf01_lindley(static_cast<double>(n), std::sqrt(static_cast<double>(n)) * std::fabs(xbar)).log_bf;
        const double err = std::fabs(b10 + b01);
        worst_abs = std::max(worst_abs, err);
        worst_scaled = std::max(worst_scaled, err / std::max(1.0, std::fabs(b10)));
        over_abs += err > 1e-12;
    }
    return {worst_scaled <= 1e-12, "max |sum|/max(1,|log B10|) = " + fmt("%.3g", worst_scaled) +
                                       "; max |sum| = " + fmt("%.3g", worst_abs) + " (" + std::to_string(over_abs) +
                                       "/1000 above 1e-12 absolute)"};
}

// 2. Closed-form 1/lambda marginals against quadrature.
Outcome oracle_equivalence() {
    Rng rng({102, 0});
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto n = 1 + static_cast<std::size_t>(rng.uniform() * 50.0);
        const auto gen = rng.uniform() < 0.5 ? CountFamily::poisson : CountFamily::geometric;
        const double mean = 0.2 + 9.8 * rng.uniform();
        const auto data = simulate(gen, mean, std::min<std::size_t>(n, 50), rng);
        const double dp = std::fabs(log_marginal_poisson_improper(data).log_value -
                                    log_marginal_quadrature(data, CountFamily::poisson).log_value);
        const double dg = std::fabs(log_marginal_geometric_improper(data).log_value -
                                    log_marginal_quadrature(data, CountFamily::geometric).log_value);
        worst = std::max({worst, dp, dg});
    }
    return {worst <= 1e-6, "max |closed form - quadrature| (log) = " + fmt("%.3g", worst) + " over 50 datasets x 2 families"};
}

// 3. Lindley: log B01 increasing over n = 1e2..1e6 at t = 1.96.
Outcome lindley() {
    const auto res = run_lindley(1.96, {100, 1000, 10000, 100000, 1000000});
    bool increasing = true;
    for (std::size_t i = 1; i < res.lindley.size(); ++i)
        increasing = increasing && res.lindley[i].log_bf01 > res.lindley[i - 1].log_bf01;
    const double v = res.lindley.back().log_bf01;
    return {increasing && std::fabs(v - 4.9869) <= 1e-3,
            std::string(increasing ? "increasing" : "NOT increasing") + "; log B01(1e6) = " + fmt("%.6f", v)};
}

// 4. fig1 at desk scale.
Outcome fig1() {
    auto c = ExperimentConfig::defaults(Experiment::fig1);
    c.seed = {104, 0};
    const auto res = run_fig1(c);
    std::size_t neg = 0, tot = 0;
    for (const auto& r : res.fig1)
        if (r.hypothesis == "H0" && r.n == 1000) {
            ++tot;
            neg += r.log_bf10 < 0.0;
        }
    const double frac = static_cast<double>(neg) / static_cast<double>(tot);
    std::vector<double> h0, h1;
    for (auto n : c.n_grid) {
        h0.push_back(res.ribbons.value("H0", "log_bf10", n, "q50"));
        h1.push_back(res.ribbons.value("H1", "log_bf10", n, "q50"));
    }
    const bool dec = h0[0] > h0[1] && h0[1] > h0[2];
    const bool inc = h1[0] < h1[1] && h1[1] < h1[2];
    return {frac >= 0.9 && dec && inc,
            "H0 frac(log B10 < 0 | n=1000) = " + fmt("%.3f", frac) + "; H0 medians " + fmt("%.3f", h0[0]) + " > " +
                fmt("%.3f", h0[1]) + " > " + fmt("%.3f", h0[2]) + "; H1 medians " + fmt("%.3f", h1[0]) + " < " +
                fmt("%.3f", h1[1]) + " < " + fmt("%.3f", h1[2])};
}

// 5. Gibbs, marginal MH and grid agree on a pinned n = 20 Poisson(4) sample.
Outcome sampler_agreement() {
    Rng rng({2024, 0});
    std::vector<Count> xs(20);
    for (auto& x : xs) x = sample_poisson(4.0, rng);
    const CountDataset data(xs);
    const MixtureSpec spec(0.5);
    McmcConfig mc;
    mc.iterations = 60000;
    mc.burn_in = 10000;
    const auto gibbs = run_gibbs(data, spec, mc, {105, 1});
    const auto mh = run_marginal_mh(data, spec, mc, {105, 2});
    const double g = mean_of(gibbs.alpha_draws), m = mean_of(mh.alpha_draws);
    const double q = grid_posterior_alpha(data, spec).mean;
    const double worst = std::max({std::fabs(g - m), std::fabs(g - q), std::fabs(m - q)});
    return {worst <= 0.02 && gibbs.alpha_draws.size() >= 50000 && mh.alpha_draws.size() >= 50000,
            "E[alpha]: gibbs " + fmt("%.4f", g) + ", marginal MH " + fmt("%.4f", m) + ", grid " + fmt("%.4f", q) +
                "; max pairwise gap " + fmt("%.4f", worst) + " (" + std::to_string(gibbs.alpha_draws.size()) +
                " draws each)"};
}

// 6. conditional_alpha is Beta(a0 + n1, a0 + n2); the kernel's normaliser is
//    checked independently by quadrature on the logit axis.
Outcome conjugacy() {
    std::size_t states = 0, mismatches = 0;
    double worst = 0.0;
    for (double a0 : {0.1, 0.5, 1.0})
        for (std::size_t n1 = 0; n1 <= 30; ++n1)
            for (std::size_t n2 = 0; n1 + n2 <= 30; ++n2) {
                ++states;
                const auto b = conditional_alpha(AllocationState::from_counts(n1, 0, n2, 0), a0);
                if (b.a != a0 + static_cast<double>(n1) || b.b != a0 + static_cast<double>(n2)) ++mismatches;
                const double A = a0 + static_cast<double>(n1), B = a0 + static_cast<double>(n2);
                auto log_kernel = [&](double u) { return -A * softplus(-u) - B * softplus(u); };
                const double lz = integrate_log(log_kernel, std::log(A / B)).log_value;
                worst = std::max(worst, std::fabs(lz - log_beta(b.a, b.b)));
            }
    return {mismatches == 0 && worst <= 1e-9, std::to_string(states) + " states, " + std::to_string(mismatches) +
                                                  " parameter mismatches; max |log normaliser error| = " +
                                                  fmt("%.3g", worst)};
}

// 7 and 8 share one fig3 run (fig3 carries the fig2 columns).
const ExperimentResult& fig3_run() {
    static const ExperimentResult res = [] {
        auto c = ExperimentConfig::defaults(Experiment::fig3);
        c.n_grid = {10, 100, 1000};
        c.replicas = 20;
        c.a0_list = {0.5};
        c.lambda_true = 4.0;
        c.mcmc.iterations = 10000;
        c.seed = {107, 0};
        return run_fig3(c);
    }();
    return res;
}

Outcome fig2_trend() {
    const auto& res = fig3_run();
    const std::string cond = "a0_0.5";
    std::vector<double> med;
    for (std::size_t n : {10, 100, 1000}) med.push_back(res.ribbons.value(cond, "post_median_alpha", n, "q50"));
    const bool nondec = med[0] <= med[1] && med[1] <= med[2];
    return {nondec && med[2] >= 0.9, "replica-median of posterior median alpha: " + fmt("%.4f", med[0]) + ", " +
                                         fmt("%.4f", med[1]) + ", " + fmt("%.4f", med[2]) + " at n = 10, 100, 1000"};
}

Outcome fig3_consistency() {
    const auto& res = fig3_run();
    bool in_unit = true;
    for (const auto& r : res.mixture)
        in_unit = in_unit && r.post_prob_m1_shared >= 0.0 && r.post_prob_m1_shared <= 1.0;
    const double med = res.ribbons.value("a0_0.5", "post_prob_m1_shared", 1000, "q50");
    const auto csv = experiment_csv(res);
    const bool printed_column = csv.substr(0, csv.find('\n')).find("post_prob_m1_printed") != std::string::npos;
    for (const auto& note : res.notes) std::printf("       note: %s\n", note.c_str());
    return {in_unit && med >= 0.9 && printed_column,
            std::string(in_unit ? "all" : "NOT all") + " shared-improper P(M1|x) in [0,1]; n=1000 replica-median = " +
                fmt("%.6f", med) + "; printed column " + (printed_column ? "present" : "MISSING")};
}

// 9. P0(B01(X) <= b) on the normal testbed against 2 * (1 - Phi(t_b)),
//    t_b^2 = (1 + n)/n * (ln(1 + n) - 2 ln b).
Outcome predictive_tails() {
    const std::function<double(const NormalSummary&)> stat = [](const NormalSummary& s) {
        return -log_bf10_normal(s).log_bf;
    };
    const auto null = normal_null_model();
    std::string detail;
    bool pass = true;
    for (double t_obs : {1.0, 2.0, 2.5}) {
        const std::size_t n = 50;
        const NormalSummary obs(n, t_obs / std::sqrt(static_cast<double>(n)));
        const double log_b = stat(obs);
        // Model 1 is H0 as well, so p1 = P0(B01(X) <= b).
        const auto rep = predictive_bf_tails(obs, null, null, stat, PredictiveMode::prior, 10000,
                                             {109, static_cast<std::uint64_t>(t_obs * 10)});
        const double nn = static_cast<double>(n);
        const double tb = std::sqrt((1.0 + nn) / nn * (std::log1p(nn) - 2.0 * log_b));
        const double exact = 2.0 * normal_upper_tail(tb);
        const double z = std::fabs(rep.p1 - exact) / rep.mc_se1;
        pass = pass && z <= 3.0;
        if (!detail.empty()) detail += "; ";
        detail += "t=" + fmt("%.1f", t_obs) + ": MC " + fmt("%.4f", rep.p1) + " vs " + fmt("%.4f", exact) + " (" +
                  fmt("%.2f", z) + " se)";
    }
    return {pass, detail};
}

// 10. Every CLI command twice with identical flags: byte-identical outputs.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI in dir; returns checksums of stdout and of every CSV/SVG written.
std::map<std::string, std::uint64_t> run_and_hash(const std::string& args, const fs::path& dir, int& rc) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "x.csv") << "2\n3\n0\n7\n5\n4\n1\n3\n";
    const std::string cmd = "cd '" + dir.string() + "' && '" + BAYES_ARBITER_CLI_PATH + "' " + args +
                            " > stdout.json 2> stderr.txt";
    rc = std::system(cmd.c_str());
    std::map<std::string, std::uint64_t> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        const auto ext = e.path().extension();
        const auto name = e.path().filename().string();
        if (name == "stdout.json" || ext == ".csv" || ext == ".svg")
            if (name != "x.csv") out[fs::relative(e.path(), dir).string()] = fnv1a(slurp(e.path()));
    }
    return out;
}

Outcome cli_determinism() {
    const std::vector<std::string> commands = {
        "bf normal --n 50 --xbar 0.3",
        "bf poisgeo --data 2,3,0,7",
        "bf poisgeo --data 2,3 --quadrature",
        "mixture --data-file x.csv --a0 0.5 --iters 10000 --seed 7",
        "mixture --data-file x.csv --sampler marginal --iters 5000 --seed 7",
        "mixture --data-file x.csv --sampler grid",
        "calibrate normal --n 100 --xbar 0.25 --seed 3",
        "calibrate normal --n 100 --xbar 0.25 --mode posterior --n-rep 2000 --seed 3",
        "calibrate poisgeo --data 2,3,0,7 --n-rep 300 --seed 3",
        "calibrate ppp --data 2,3,0,7 --seed 3",
        "calibrate alpha --replicas 20 --n-obs 30 --iters 1000 --burn-in 200 --seed 3",
        "lindley --t 1.96 --n 10,100,1e6",
        "experiment fig1 --seed 5 --out out",
        "experiment fig2 --seed 5 --replicas 5 --iters 2000 --burn-in 500 --out out",
        "experiment fig3 --seed 5 --replicas 5 --iters 2000 --burn-in 500 --out out",
        "experiment lindley --seed 5 --out out",
    };
    const fs::path base = fs::temp_directory_path() / ("bayes_arbiter_acceptance_" + std::to_string(::getpid()));
    std::size_t files = 0;
    std::vector<std::string> bad;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        int rc_a = 0, rc_b = 0;
        const auto a = run_and_hash(commands[i], base / ("a" + std::to_string(i)), rc_a);
        const auto b = run_and_hash(commands[i], base / ("b" + std::to_string(i)), rc_b);
        files += a.size();
        if (rc_a != 0 || rc_b != 0 || a != b || a.empty()) bad.push_back(commands[i]);
    }
    fs::remove_all(base);
    std::string detail = std::to_string(commands.size()) + " commands, " + std::to_string(files) +
                         " outputs checksummed (FNV-1a)";
    for (const auto& b : bad) detail += "; differs or failed: " + b;
    return {bad.empty(), detail};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "reciprocal identity log B10 + log B01 = 0", 1.0, reciprocal_identity},
        {2, "closed-form marginals match quadrature (1e-6, log)", 10.0, oracle_equivalence},
        {3, "Lindley paradox at t = 1.96", 1.0, lindley},
        {4, "fig1 trends (250 replicas)", 5.0, fig1},
        {5, "mixture samplers agree with the grid oracle (0.02)", 120.0, sampler_agreement},
        {6, "conjugate alpha conditional, exhaustive n1 + n2 <= 30", 1.0, conjugacy},
        {7, "fig2 trend (20 replicas, a0 = 0.5)", 900.0, fig2_trend},
        {8, "fig3 schema and consistency", 0.0, fig3_consistency},
        {9, "prior predictive tail vs inverted Gaussian tail (3 se)", 5.0, predictive_tails},
        {10, "CLI reruns are byte-identical", 0.0, cli_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = c.budget_seconds == 0.0 || secs <= c.budget_seconds;
        const bool pass = o.pass && in_budget;
        failed += !pass;
        std::printf("%s [criterion %2d] %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    o.detail.c_str(), secs,
                    in_budget ? "" : (", over the " + fmt("%.0f", c.budget_seconds) + " s budget").c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
