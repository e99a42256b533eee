#pragma once

// Seed-pinned replication harness for the consistency (fig1), mixture-weight
// concentration (fig2), posterior-probability comparison (fig3) and Lindley
// experiments. Every result is a pure function of the configuration: each
// replica draws from its own RngSeed child keyed by values (not positions),
// and rows are emitted in a fixed order regardless of thread scheduling.

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "evidence.hpp"
#include "format.hpp"
#include "mixture.hpp"
#include "parallel.hpp"
#include "predictive.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "svg.hpp"

namespace bayes_arbiter {

enum class Experiment { fig1, fig2, fig3, lindley };

inline std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::fig1: return "fig1";
        case Experiment::fig2: return "fig2";
        case Experiment::fig3: return "fig3";
        case Experiment::lindley: return "lindley";
    }
    return "unknown";
}

inline std::optional<Experiment> parse_experiment(std::string_view s) {
    if (s == "fig1") return Experiment::fig1;
    if (s == "fig2") return Experiment::fig2;
    if (s == "fig3") return Experiment::fig3;
    if (s == "lindley") return Experiment::lindley;
    return std::nullopt;
}

struct ExperimentConfig {
    Experiment experiment = Experiment::fig1;
    std::vector<std::size_t> n_grid;
    std::size_t replicas = 1;
    std::vector<double> a0_list;
    double lambda_true = 4.0;
    double t = 1.96;  // lindley only
    McmcConfig mcmc{};
    RngSeed seed{};
    std::vector<double> ribbon_quantiles{0.0, 0.25, 0.5, 0.75, 1.0};
    std::filesystem::path output_dir = ".";

    /// Desk-scale defaults. full_scale raises the fig2/fig3 replica count to 100.
    static ExperimentConfig defaults(Experiment e, bool full_scale = false) {
        ExperimentConfig c;
        c.experiment = e;
        switch (e) {
            case Experiment::fig1:
                c.n_grid = {10, 100, 1000};
                c.replicas = 250;
                break;
            case Experiment::fig2:
            case Experiment::fig3:
                c.n_grid = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
                c.replicas = full_scale ? 100 : 20;
                c.a0_list = {0.1, 0.5, 1.0};
                break;
            case Experiment::lindley:
                c.n_grid = {10, 100, 1000, 10000, 100000, 1000000};
                c.replicas = 1;
                break;
        }
        return c;
    }

    void validate() const {
        if (n_grid.empty()) throw DomainError("ExperimentConfig: n_grid must be non-empty");
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            if (n_grid[i] < 1) throw DomainError("ExperimentConfig: n_grid entries must be at least 1");
            if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw DomainError("ExperimentConfig: n_grid must be ascending");
        }
        if (replicas < 1) throw DomainError("ExperimentConfig: replicas must be at least 1");
        if ((experiment == Experiment::fig2 || experiment == Experiment::fig3) && a0_list.empty())
            throw DomainError("ExperimentConfig: a0_list must be non-empty");
        for (double a0 : a0_list)
            if (!(a0 > 0.0)) throw DomainError("ExperimentConfig: a0 values must be positive");
        if (!(lambda_true > 0.0)) throw DomainError("ExperimentConfig: lambda_true must be positive");
        if (!(t >= 0.0)) throw DomainError("ExperimentConfig: t must be non-negative");
        for (std::size_t i = 0; i < ribbon_quantiles.size(); ++i) {
            if (!(ribbon_quantiles[i] >= 0.0 && ribbon_quantiles[i] <= 1.0))
                throw DomainError("ExperimentConfig: ribbon quantiles must lie in [0, 1]");
            if (i > 0 && ribbon_quantiles[i] <= ribbon_quantiles[i - 1])
                throw DomainError("ExperimentConfig: ribbon quantiles must be ascending");
        }
        if (experiment == Experiment::fig2 || experiment == Experiment::fig3) mcmc.validate();
    }
};

/// Ribbon rows: one value per (condition, series, n, quantile).
struct RibbonRow {
    std::string condition;
    std::string series;
    std::size_t n = 0;
    double probability = 0.0;
    std::string quantile_label;
    double value = 0.0;
};

struct RibbonTable {
    std::vector<RibbonRow> rows;

    /// Values for one (condition, series, n), in quantile order.
    std::vector<double> values(std::string_view condition, std::string_view series, std::size_t n) const {
        std::vector<double> out;
        for (const auto& r : rows)
            if (r.condition == condition && r.series == series && r.n == n) out.push_back(r.value);
        return out;
    }

    double value(std::string_view condition, std::string_view series, std::size_t n, std::string_view label) const {
        for (const auto& r : rows)
            if (r.condition == condition && r.series == series && r.n == n && r.quantile_label == label)
                return r.value;
        throw DomainError("RibbonTable: no such row");
    }
};

inline std::string quantile_label(double p) {
    if (p == 0.0) return "min";
    if (p == 1.0) return "max";
    return "q" + fmt_g10(100.0 * p);
}

struct Fig1Row {
    std::string hypothesis;
    std::size_t n = 0;
    std::size_t replica = 0;
    double log_bf10 = 0.0;
};

struct MixtureRow {
    double a0 = 0.0;
    std::size_t n = 0;
    std::size_t replica = 0;
    double post_mean_alpha = 0.0;
    double post_median_alpha = 0.0;
    double post_prob_m1_shared = 0.0;   // fig3 only
    double post_prob_m1_printed = 0.0;  // fig3 only
    double log_bf12_shared = 0.0;
    double log_bf12_printed = 0.0;
};

struct LindleyRow {
    double t = 0.0;
    std::size_t n = 0;
    double log_bf01 = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<Fig1Row> fig1;
    std::vector<MixtureRow> mixture;
    std::vector<LindleyRow> lindley;
    RibbonTable ribbons;
    std::size_t degenerate_redraws = 0;
    std::vector<std::string> notes;
};

namespace detail {

inline void append_ribbon(RibbonTable& table, const std::string& condition, const std::string& series,
                          std::size_t n, std::vector<double> values, std::span<const double> probs) {
    std::sort(values.begin(), values.end());
    for (double p : probs) table.rows.push_back({condition, series, n, p, quantile_label(p), quantile_sorted(values, p)});
}

inline std::string a0_condition(double a0) { return "a0_" + fmt_g10(a0); }

inline std::uint64_t tag(double v) { return std::bit_cast<std::uint64_t>(v); }

} // namespace detail

/// log B10 replicas under H0 (xbar ~ N(0, 1/n)) and under the H1 prior
/// predictive (mu ~ N(0, 1), xbar ~ N(mu, 1/n)).
inline ExperimentResult run_fig1(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult res;
    res.config = config;
    const std::size_t per_h = config.n_grid.size() * config.replicas;
    std::vector<Fig1Row> rows(2 * per_h);
    parallel_for(rows.size(), [&](std::size_t idx) {
        const std::size_t h = idx / per_h;
        const std::size_t ni = (idx % per_h) / config.replicas;
        const std::size_t r = idx % config.replicas;
        const std::size_t n = config.n_grid[ni];
        Rng rng(config.seed.child({1, h, n, r}));
        const double mu = h == 0 ? 0.0 : sample_normal(0.0, 1.0, rng);
        const double xbar = sample_normal(mu, 1.0 / std::sqrt(static_cast<double>(n)), rng);
        rows[idx] = {h == 0 ? "H0" : "H1", n, r, log_bf10_normal(NormalSummary(n, xbar)).log_bf};
    });
    res.fig1 = std::move(rows);
    for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
            std::vector<double> v;
            for (std::size_t r = 0; r < config.replicas; ++r) v.push_back(res.fig1[h * per_h + ni * config.replicas + r].log_bf10);
            detail::append_ribbon(res.ribbons, h == 0 ? "H0" : "H1", "log_bf10", config.n_grid[ni], std::move(v),
                                  config.ribbon_quantiles);
        }
    return res;
}

namespace detail {

inline ExperimentResult run_mixture_experiment(const ExperimentConfig& config, bool with_bayes_factors) {
    config.validate();
    ExperimentResult res;
    res.config = config;
    const std::size_t per_a0 = config.n_grid.size() * config.replicas;
    std::vector<MixtureRow> rows(config.a0_list.size() * per_a0);
    std::vector<std::size_t> redraws(rows.size(), 0);
    parallel_for(rows.size(), [&](std::size_t idx) {
        const double a0 = config.a0_list[idx / per_a0];
        const std::size_t n = config.n_grid[(idx % per_a0) / config.replicas];
        const std::size_t r = idx % config.replicas;
        // Datasets depend on (n, replica) only, so every a0 panel sees the same data.
        Rng rng(config.seed.child({2, n, r}));
        CountDataset data = simulate_counts(CountFamily::poisson, config.lambda_true, n, rng);
        while (data.all_zero()) {
            ++redraws[idx];
            data = simulate_counts(CountFamily::poisson, config.lambda_true, n, rng);
        }
        const auto chain = run_gibbs(data, MixtureSpec(a0), config.mcmc, config.seed.child({3, tag(a0), n, r}));
        MixtureRow row;
        row.a0 = a0;
        row.n = n;
        row.replica = r;
        row.post_mean_alpha = mean_of(chain.alpha_draws);
        row.post_median_alpha = median_of(chain.alpha_draws);
        if (with_bayes_factors) {
            row.log_bf12_shared = log_bf12_shared_improper(data).log_bf;
            row.log_bf12_printed = log_bf12_printed(data).log_bf;
            row.post_prob_m1_shared = posterior_probability_from_log_bf(row.log_bf12_shared);
            row.post_prob_m1_printed = posterior_probability_from_log_bf(row.log_bf12_printed);
        }
        rows[idx] = row;
    });
    res.mixture = std::move(rows);
    for (auto c : redraws) res.degenerate_redraws += c;

    for (std::size_t ai = 0; ai < config.a0_list.size(); ++ai) {
        const std::string cond = a0_condition(config.a0_list[ai]);
        for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
            std::vector<double> means, medians, shared, printed;
            for (std::size_t r = 0; r < config.replicas; ++r) {
                const auto& row = res.mixture[ai * per_a0 + ni * config.replicas + r];
                means.push_back(row.post_mean_alpha);
                medians.push_back(row.post_median_alpha);
                shared.push_back(row.post_prob_m1_shared);
                printed.push_back(row.post_prob_m1_printed);
            }
            const std::size_t n = config.n_grid[ni];
            append_ribbon(res.ribbons, cond, "post_mean_alpha", n, means, config.ribbon_quantiles);
            append_ribbon(res.ribbons, cond, "post_median_alpha", n, medians, config.ribbon_quantiles);
            if (with_bayes_factors) {
                append_ribbon(res.ribbons, cond, "post_prob_m1_shared", n, shared, config.ribbon_quantiles);
                append_ribbon(res.ribbons, cond, "post_prob_m1_printed", n, printed, config.ribbon_quantiles);
            }
        }
    }
    if (with_bayes_factors) {
        double max_gap = 0.0;
        for (const auto& row : res.mixture)
            max_gap = std::max(max_gap, std::fabs(row.post_prob_m1_printed - row.post_prob_m1_shared));
        res.notes.push_back("max |P(M1|x) printed - P(M1|x) shared-improper| over all replicas = " + fmt_g10(max_gap));
    }
    if (res.degenerate_redraws > 0)
        res.notes.push_back("all-zero datasets redrawn: " + std::to_string(res.degenerate_redraws));
    return res;
}

} // namespace detail

/// Posterior mean and median of alpha over Poisson(lambda_true) replicas.
inline ExperimentResult run_fig2(const ExperimentConfig& config) {
    return detail::run_mixture_experiment(config, false);
}

/// fig2 plus P(M1 | x) = B12 / (1 + B12) from the shared-improper and printed Bayes factors.
inline ExperimentResult run_fig3(const ExperimentConfig& config) {
    return detail::run_mixture_experiment(config, true);
}

inline ExperimentResult run_lindley(double t, const std::vector<std::size_t>& n_grid) {
    auto config = ExperimentConfig::defaults(Experiment::lindley);
    config.t = t;
    config.n_grid = n_grid;
    config.validate();
    ExperimentResult res;
    res.config = config;
    for (std::size_t n : n_grid) res.lindley.push_back({t, n, log_bf01_lindley(static_cast<double>(n), t).log_bf});
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    switch (config.experiment) {
        case Experiment::fig1: return run_fig1(config);
        case Experiment::fig2: return run_fig2(config);
        case Experiment::fig3: return run_fig3(config);
        case Experiment::lindley: {
            auto res = run_lindley(config.t, config.n_grid);
            res.config = config;
            return res;
        }
    }
    throw DomainError("run_experiment: unknown experiment");
}

// ---- text artifacts -------------------------------------------------------

inline std::string experiment_csv(const ExperimentResult& res) {
    std::ostringstream out;
    switch (res.config.experiment) {
        case Experiment::fig1:
            out << "experiment,hypothesis,n,replica,log_bf10\n";
            for (const auto& r : res.fig1)
                out << "fig1," << r.hypothesis << ',' << r.n << ',' << r.replica << ',' << fmt_g10(r.log_bf10) << '\n';
            break;
        case Experiment::fig2:
            out << "a0,n,replica,post_mean_alpha,post_median_alpha\n";
            for (const auto& r : res.mixture)
                out << fmt_g10(r.a0) << ',' << r.n << ',' << r.replica << ',' << fmt_g10(r.post_mean_alpha) << ','
                    << fmt_g10(r.post_median_alpha) << '\n';
            break;
        case Experiment::fig3:
            out << "a0,n,replica,post_mean_alpha,post_median_alpha,post_prob_m1_shared,post_prob_m1_printed\n";
            for (const auto& r : res.mixture)
                out << fmt_g10(r.a0) << ',' << r.n << ',' << r.replica << ',' << fmt_g10(r.post_mean_alpha) << ','
                    << fmt_g10(r.post_median_alpha) << ',' << fmt_g10(r.post_prob_m1_shared) << ','
                    << fmt_g10(r.post_prob_m1_printed) << '\n';
            break;
        case Experiment::lindley:
            out << "t,n,log_bf01\n";
            for (const auto& r : res.lindley) out << fmt_g10(r.t) << ',' << r.n << ',' << fmt_g10(r.log_bf01) << '\n';
            break;
    }
    return out.str();
}

inline std::string ribbon_csv(const RibbonTable& table) {
    std::ostringstream out;
    out << "condition,series,n,quantile,value\n";
    for (const auto& r : table.rows)
        out << r.condition << ',' << r.series << ',' << r.n << ',' << r.quantile_label << ',' << fmt_g10(r.value)
            << '\n';
    return out.str();
}

/// One SVG per condition: name -> document.
inline std::map<std::string, std::string> experiment_svgs(const ExperimentResult& res) {
    std::map<std::string, std::string> out;
    const auto& cfg = res.config;
    const std::string exp(to_string(cfg.experiment));
    const auto& probs = cfg.ribbon_quantiles;

    auto build_series = [&](const std::string& cond, const std::string& series, const std::string& label,
                            const std::string& color, bool dashed) {
        svg::RibbonSeries s;
        s.label = label;
        s.color = color;
        s.dashed = dashed;
        const std::size_t k = probs.size();
        std::vector<std::vector<double>> cols(k);
        for (std::size_t n : cfg.n_grid) {
            const auto v = res.ribbons.values(cond, series, n);
            if (v.size() != k) continue;
            s.x.push_back(static_cast<double>(n));
            for (std::size_t j = 0; j < k; ++j) cols[j].push_back(v[j]);
        }
        // nest bands outside-in: (0, k-1), (1, k-2), ...
        for (std::size_t j = 0; j < k / 2; ++j)
            s.bands.push_back({cols[j], cols[k - 1 - j], 0.18 + 0.12 * static_cast<double>(j)});
        // centre: the quantile closest to 0.5
        std::size_t mid = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (std::fabs(probs[j] - 0.5) < std::fabs(probs[mid] - 0.5)) mid = j;
        if (k > 0) s.center = cols[mid];
        return s;
    };

    switch (cfg.experiment) {
        case Experiment::fig1:
            for (const std::string h : {"H0", "H1"}) {
                svg::PlotSpec spec;
                spec.title = "log B10 over replicas under " + h;
                spec.y_label = "log B10";
                out[exp + "_" + h + ".svg"] =
                    svg::render_ribbon_plot(spec, {build_series(h, "log_bf10", "log B10", h == "H0" ? "#1f77b4" : "#d62728", false)});
            }
            break;
        case Experiment::fig2:
        case Experiment::fig3:
            for (double a0 : cfg.a0_list) {
                const std::string cond = detail::a0_condition(a0);
                svg::PlotSpec spec;
                spec.y_label = cfg.experiment == Experiment::fig2 ? "posterior estimate of alpha" : "probability";
                spec.y_range = std::make_pair(0.0, 1.0);
                std::vector<svg::RibbonSeries> series;
                if (cfg.experiment == Experiment::fig2) {
                    spec.title = "alpha posterior, Beta(" + fmt_g10(a0) + ", " + fmt_g10(a0) + ") prior";
                    series.push_back(build_series(cond, "post_mean_alpha", "posterior mean", "#56b4e9", false));
                    series.push_back(build_series(cond, "post_median_alpha", "posterior median", "#777777", true));
                } else {
                    spec.title = "P(M1|x) vs alpha median, a0 = " + fmt_g10(a0);
                    series.push_back(build_series(cond, "post_median_alpha", "median of alpha", "#777777", false));
                    series.push_back(build_series(cond, "post_prob_m1_shared", "P(M1|x)", "#d62728", true));
                }
                out[exp + "_" + cond + ".svg"] = svg::render_ribbon_plot(spec, series);
            }
            break;
        case Experiment::lindley: {
            svg::PlotSpec spec;
            spec.title = "log B01 at fixed t = " + fmt_g10(cfg.t);
            spec.y_label = "log B01";
            svg::RibbonSeries s;
            s.label = "log B01";
            s.color = "#2ca02c";
            for (const auto& r : res.lindley) {
                s.x.push_back(static_cast<double>(r.n));
                s.center.push_back(r.log_bf01);
            }
            out[exp + "_t_" + fmt_g10(cfg.t) + ".svg"] = svg::render_ribbon_plot(spec, {s});
            break;
        }
    }
    return out;
}

/// Writes a file through a temporary sibling and a rename.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    try {
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            f << content;
            f.flush();
            if (!f) throw std::runtime_error("write failed: " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

/// Artifact name -> content for one result: <exp>.csv, <exp>_ribbon.csv
/// (except lindley) and the SVGs.
inline std::vector<std::pair<std::string, std::string>> experiment_artifacts(const ExperimentResult& res) {
    const std::string exp(to_string(res.config.experiment));
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back(exp + ".csv", experiment_csv(res));
    if (res.config.experiment != Experiment::lindley) out.emplace_back(exp + "_ribbon.csv", ribbon_csv(res.ribbons));
    for (auto& [name, doc] : experiment_svgs(res)) out.emplace_back(name, std::move(doc));
    return out;
}

/// Writes the artifacts into dir. On failure every file written so far is
/// removed before the exception propagates.
inline std::vector<std::filesystem::path> write_artifacts(
    const std::vector<std::pair<std::string, std::string>>& artifacts, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& [name, content] : artifacts) {
            const auto p = dir / name;
            write_text_atomic(p, content);
            written.push_back(p);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
    return written;
}

inline std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& res,
                                                                   const std::filesystem::path& dir) {
    return write_artifacts(experiment_artifacts(res), dir);
}

} // namespace bayes_arbiter
