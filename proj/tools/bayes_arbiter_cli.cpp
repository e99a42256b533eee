// bayes-arbiter: command-line front end.
//
// Scalar results go to stdout as one JSON object; experiments write CSV and
// SVG files plus a manifest. Exit codes: 0 ok, 2 usage or domain error,
// 3 degenerate input, 4 numerical accuracy failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bayes_arbiter.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace bayes_arbiter;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitAccuracy = 4;

// Numbers in every output pass through %.10g so reruns compare byte for byte.
json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(fmt_g10(v));
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DomainError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "10,100,1e6" -> {10, 100, 1000000}. Entries must be integral.
std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || !(v >= 0.0) || v != std::floor(v) || v > 1e15)
            throw DomainError(std::string(what) + ": '" + tok + "' is not a non-negative integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw DomainError(std::string(what) + ": empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw DomainError(std::string(what) + ": '" + tok + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw DomainError(std::string(what) + ": empty list");
    return out;
}

// Counts separated by commas or whitespace. '#' starts a comment; a first
// line that is not numeric is taken as a header.
std::vector<Count> parse_counts(const std::string& text) {
    std::vector<Count> out;
    std::istringstream lines(text);
    bool first = true;
    for (std::string line; std::getline(lines, line);) {
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
        std::istringstream toks(line);
        std::vector<Count> row;
        bool numeric = true;
        for (std::string tok; toks >> tok;) {
            std::size_t used = 0;
            long long v = 0;
            try {
                v = std::stoll(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first && out.empty()) {
                first = false;
                continue;
            }
            throw DomainError("data: non-integer entry in '" + trim(line) + "'");
        }
        if (!row.empty()) first = false;
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

struct DataSource {
    std::string inline_data;
    std::string file;

    void attach(CLI::App* cmd) {
        auto* d = cmd->add_option("--data", inline_data, "Counts, comma separated");
        auto* f = cmd->add_option("--data-file", file, "File of counts (comma, space or newline separated)");
        d->excludes(f);
    }

    CountDataset load() const {
        if (inline_data.empty() && file.empty()) throw DomainError("one of --data or --data-file is required");
        return CountDataset(parse_counts(file.empty() ? inline_data : read_file(file)));
    }

    json describe() const { return file.empty() ? json{{"data", inline_data}} : json{{"data_file", file}}; }
};

struct SeedFlags {
    std::uint64_t master = 1;
    std::uint64_t stream = 0;

    void attach(CLI::App* cmd, bool required) {
        auto* s = cmd->add_option("--seed", master, "Master seed");
        if (required) s->required();
        cmd->add_option("--stream", stream, "Stream index");
    }
    RngSeed seed() const { return {master, stream}; }
    json describe() const { return {{"master_seed", master}, {"stream_index", stream}}; }
};

void write_manifest(const fs::path& path, const std::string& command, const json& config, const json& seed,
                    const std::vector<std::pair<std::string, std::string>>& artifacts, double wall_seconds) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    json arts = json::array();
    for (const auto& [name, content] : artifacts)
        arts.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
    m["artifacts"] = arts;
    m["wall_time_seconds"] = num(wall_seconds);
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    write_text_atomic(path, m.dump(2) + "\n");
}

// ---- config file ------------------------------------------------------------

// Pulls "--config FILE" out of argv and splices the file's key=value lines in
// as --key=value tokens right after the subcommand words, so that flags given
// on the command line come later and win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (config_path.empty()) return args;

    std::vector<std::string> tokens;
    std::istringstream in(read_file(config_path));
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw DomainError(config_path + ":" + std::to_string(lineno) + ": missing key");
        for (char& c : key)
            if (c == '_') c = '-';
        if (key.rfind("--", 0) != 0) key = "--" + key;
        tokens.push_back(eq == std::string::npos ? key : key + "=" + trim(line.substr(eq + 1)));
    }
    std::size_t at = 1;
    while (at < args.size() && !args[at].empty() && args[at][0] != '-') ++at;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
    return args;
}

// ---- commands -----------------------------------------------------------------

json bf_json(const LogBayesFactor& bf) {
    return {{"log_bf", num(bf.log_bf)},
            {"bf", num(bf.bf())},
            {"numerator", bf.numerator_model},
            {"denominator", bf.denominator_model},
            {"method", std::string(to_string(bf.method))}};
}

json summary_json(const ParameterSummary& s) {
    json q = json::object();
    for (const auto& [p, v] : s.quantiles) q[fmt_g10(p)] = num(v);
    return {{"mean", num(s.mean)}, {"median", num(s.median)}, {"quantiles", q}};
}

McmcConfig mcmc_from(std::size_t iters, std::size_t burn_in) {
    McmcConfig c;
    c.iterations = iters;
    c.burn_in = burn_in;
    return c;
}

CountFamily parse_family(const std::string& s) {
    if (s == "poisson") return CountFamily::poisson;
    if (s == "geometric") return CountFamily::geometric;
    throw DomainError("family must be poisson or geometric, got '" + s + "'");
}

struct Emitted {
    json out;
    json config;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian model choice: Bayes factors, mixture estimation and predictive calibration"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config_unused;
    app.add_option("--config", config_unused, "Flat key=value file; flags on the command line override it");

    std::string manifest_path;
    auto add_manifest = [&](CLI::App* cmd) {
        cmd->add_option("--manifest", manifest_path, "Write a run manifest to this path");
    };

    // bf
    auto* bf = app.add_subcommand("bf", "Closed-form Bayes factors");
    bf->require_subcommand(1);
    auto* bf_normal = bf->add_subcommand("normal", "Normal mean point null, N(0,1) alternative prior on the standardized mean");
    std::size_t bfn_n = 0;
    double bfn_xbar = 0.0, bfn_theta0 = 0.0, bfn_sigma = 1.0;
    bf_normal->add_option("--n", bfn_n, "Sample size")->required();
    bf_normal->add_option("--xbar", bfn_xbar, "Sample mean")->required();
    bf_normal->add_option("--theta0", bfn_theta0, "Null value");
    bf_normal->add_option("--sigma", bfn_sigma, "Known standard deviation");
    add_manifest(bf_normal);

    auto* bf_pg = bf->add_subcommand("poisgeo", "Poisson versus Geometric under the 1/lambda prior");
    DataSource bfpg_data;
    bfpg_data.attach(bf_pg);
    bool bfpg_quad = false;
    QuadratureConfig bfpg_qcfg;
    bf_pg->add_flag("--quadrature", bfpg_quad, "Also integrate both marginals numerically");
    bf_pg->add_option("--quad-tol", bfpg_qcfg.tolerance, "Quadrature convergence tolerance on the log scale");
    bf_pg->add_option("--quad-max-refinements", bfpg_qcfg.max_refinements, "Panel doublings before giving up");
    add_manifest(bf_pg);

    // mixture
    auto* mix = app.add_subcommand("mixture", "Posterior of the Poisson/Geometric mixture weight alpha");
    DataSource mix_data;
    mix_data.attach(mix);
    double mix_a0 = 0.5;
    std::size_t mix_iters = 10000, mix_burn = 2000, mix_cells = 200;
    std::string mix_sampler = "gibbs", mix_quantiles = "0.025,0.5,0.975";
    SeedFlags mix_seed;
    mix->add_option("--a0", mix_a0, "Beta(a0, a0) prior on alpha");
    mix->add_option("--iters", mix_iters, "Total iterations");
    mix->add_option("--burn-in", mix_burn, "Burn-in iterations");
    mix->add_option("--sampler", mix_sampler, "gibbs, marginal or grid")
        ->check(CLI::IsMember({"gibbs", "marginal", "grid"}));
    mix->add_option("--quantiles", mix_quantiles, "Reported quantile probabilities");
    mix->add_option("--grid-cells", mix_cells, "Alpha cells for the grid sampler");
    mix_seed.attach(mix, false);
    add_manifest(mix);

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Predictive calibration");
    cal->require_subcommand(1);
    auto* cal_normal = cal->add_subcommand("normal", "Tail probabilities of B01 on the normal testbed");
    std::size_t caln_n = 0, cal_nrep = 10000;
    double caln_xbar = 0.0;
    std::string cal_mode = "prior";
    SeedFlags cal_seed;
    cal_normal->add_option("--n", caln_n, "Sample size")->required();
    cal_normal->add_option("--xbar", caln_xbar, "Observed mean (sigma = 1, theta0 = 0)")->required();
    cal_normal->add_option("--mode", cal_mode, "prior or posterior")->check(CLI::IsMember({"prior", "posterior"}));
    cal_normal->add_option("--n-rep", cal_nrep, "Replicates per model");
    cal_seed.attach(cal_normal, false);
    add_manifest(cal_normal);

    auto* cal_pg = cal->add_subcommand("poisgeo", "Posterior-predictive tails of the shared-improper B12");
    DataSource calpg_data;
    calpg_data.attach(cal_pg);
    cal_pg->add_option("--n-rep", cal_nrep, "Replicates per model");
    cal_seed.attach(cal_pg, false);
    add_manifest(cal_pg);

    auto* cal_alpha = cal->add_subcommand("alpha", "Bootstrap cutoff for a posterior summary of alpha");
    double cala_a0 = 0.5, cala_lambda = 4.0, cala_q = 0.05;
    std::size_t cala_nobs = 100, cala_reps = 100, cala_iters = 10000, cala_burn = 2000;
    std::string cala_generator = "geometric", cala_summary = "median";
    cal_alpha->add_option("--a0", cala_a0, "Beta(a0, a0) prior on alpha");
    cal_alpha->add_option("--generator", cala_generator, "poisson or geometric");
    cal_alpha->add_option("--lambda", cala_lambda, "Generating mean");
    cal_alpha->add_option("--n-obs", cala_nobs, "Observations per replica");
    cal_alpha->add_option("--replicas", cala_reps, "Bootstrap replicas (>= 20)");
    cal_alpha->add_option("--iters", cala_iters, "MCMC iterations per replica");
    cal_alpha->add_option("--burn-in", cala_burn, "MCMC burn-in per replica");
    cal_alpha->add_option("--summary", cala_summary, "mean or median")->check(CLI::IsMember({"mean", "median"}));
    cal_alpha->add_option("--q", cala_q, "Cutoff quantile");
    cal_seed.attach(cal_alpha, false);
    add_manifest(cal_alpha);

    auto* cal_ppp = cal->add_subcommand("ppp", "Posterior predictive p-value of a count model");
    DataSource ppp_data;
    ppp_data.attach(cal_ppp);
    std::string ppp_family = "poisson", ppp_disc = "variance";
    std::size_t ppp_draws = 4000, ppp_nrep = 2000;
    cal_ppp->add_option("--family", ppp_family, "poisson or geometric");
    cal_ppp->add_option("--discrepancy", ppp_disc, "mean, variance, max or zeros")
        ->check(CLI::IsMember({"mean", "variance", "max", "zeros"}));
    cal_ppp->add_option("--draws", ppp_draws, "Posterior draws of lambda");
    cal_ppp->add_option("--n-rep", ppp_nrep, "Replicated datasets");
    cal_seed.attach(cal_ppp, false);
    add_manifest(cal_ppp);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Replication experiments (CSV + SVG + manifest)");
    std::string exp_kind, exp_out = ".", exp_ngrid, exp_a0, exp_quantiles;
    std::size_t exp_reps = 0, exp_iters = 0, exp_burn = 0;
    double exp_lambda = 0.0, exp_t = 1.96;
    bool exp_full = false;
    SeedFlags exp_seed;
    exp->add_option("kind", exp_kind, "fig1, fig2, fig3 or lindley")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "lindley"}));
    exp_seed.attach(exp, true);
    exp->add_option("--out", exp_out, "Output directory");
    exp->add_option("--replicas", exp_reps, "Replicas per condition");
    exp->add_option("--n-grid", exp_ngrid, "Sample sizes, comma separated");
    exp->add_option("--a0-list", exp_a0, "Prior parameters a0, comma separated");
    exp->add_option("--lambda", exp_lambda, "Poisson mean of the simulated data");
    exp->add_option("--iters", exp_iters, "MCMC iterations");
    exp->add_option("--burn-in", exp_burn, "MCMC burn-in");
    exp->add_option("--t", exp_t, "Fixed t statistic (lindley)");
    exp->add_option("--ribbon-quantiles", exp_quantiles, "Ribbon quantile probabilities");
    exp->add_flag("--full-scale", exp_full, "100 replicas for fig2/fig3");

    // lindley
    auto* lin = app.add_subcommand("lindley", "log B01 at a fixed t statistic");
    double lin_t = 1.96;
    std::string lin_n;
    lin->add_option("--t", lin_t, "t statistic")->required();
    lin->add_option("--n", lin_n, "Sample size(s), comma separated; 1e6 notation accepted")->required();
    add_manifest(lin);

    std::vector<std::string> args(argv, argv + argc);
    std::vector<char*> cargs;
    try {
        args = expand_config(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    for (auto& a : args) cargs.push_back(a.data());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    const auto started = std::chrono::steady_clock::now();
    std::string command;
    json config, seed_json = nullptr;
    std::vector<fs::path> written;

    try {
        json out;
        if (bf_normal->parsed()) {
            command = "bf normal";
            const NormalSummary s(bfn_n, bfn_xbar, bfn_theta0, bfn_sigma);
            config = {{"n", bfn_n}, {"xbar", num(bfn_xbar)}, {"theta0", num(bfn_theta0)}, {"sigma", num(bfn_sigma)}};
            const auto b10 = log_bf10_normal(s);
            out = {{"command", command},
                   {"n", bfn_n},
                   {"xbar", num(bfn_xbar)},
                   {"t", num(s.t_statistic())},
                   {"log_bf10", num(b10.log_bf)},
                   {"bf10", num(b10.bf())},
                   {"log_bf01", num(-b10.log_bf)},
                   {"method", std::string(to_string(b10.method))}};
        } else if (bf_pg->parsed()) {
            command = "bf poisgeo";
            config = bfpg_data.describe();
            const auto data = bfpg_data.load();
            const auto shared = log_bf12_shared_improper(data);
            const auto printed = log_bf12_printed(data);
            out = {{"command", command},
                   {"n", data.n()},
                   {"sum", data.sum()},
                   {"shared_improper", bf_json(shared)},
                   {"printed", bf_json(printed)},
                   {"post_prob_m1_shared", num(posterior_probability_from_log_bf(shared.log_bf))},
                   {"post_prob_m1_printed", num(posterior_probability_from_log_bf(printed.log_bf))},
                   {"log_gap_printed_minus_shared", num(printed.log_bf - shared.log_bf)}};
            if (bfpg_quad) {
                config.update({{"quadrature", true},
                               {"quad_tol", num(bfpg_qcfg.tolerance)},
                               {"quad_max_refinements", bfpg_qcfg.max_refinements}});
                const auto mp = log_marginal_quadrature(data, CountFamily::poisson, LambdaPrior::reciprocal(), bfpg_qcfg);
                const auto mg =
                    log_marginal_quadrature(data, CountFamily::geometric, LambdaPrior::reciprocal(), bfpg_qcfg);
                out["quadrature"] = {{"log_marginal_poisson", num(mp.log_value)},
                                     {"log_marginal_geometric", num(mg.log_value)},
                                     {"log_bf", num(mp.log_value - mg.log_value)},
                                     {"method", std::string(to_string(EvidenceMethod::quadrature))}};
            }
        } else if (mix->parsed()) {
            command = "mixture";
            const auto data = mix_data.load();
            const auto probs = parse_double_list(mix_quantiles, "--quantiles");
            const MixtureSpec spec(mix_a0);
            config = mix_data.describe();
            config.update({{"a0", num(mix_a0)},
                           {"sampler", mix_sampler},
                           {"iters", mix_iters},
                           {"burn_in", mix_burn},
                           {"quantiles", mix_quantiles}});
            seed_json = mix_seed.describe();
            out = {{"command", command}, {"sampler", mix_sampler}, {"n", data.n()}, {"a0", num(mix_a0)}};
            if (mix_sampler == "grid") {
                GridConfig g;
                g.alpha_cells = mix_cells;
                config["grid_cells"] = mix_cells;
                const auto post = grid_posterior_alpha(data, spec, g);
                json q = json::object();
                for (double p : probs) q[fmt_g10(p)] = num(post.quantile(p));
                out["alpha"] = {{"mean", num(post.mean)}, {"median", num(post.median)}, {"quantiles", q}};
            } else {
                const auto mc = mcmc_from(mix_iters, mix_burn);
                const auto chain = mix_sampler == "gibbs" ? run_gibbs(data, spec, mc, mix_seed.seed())
                                                          : run_marginal_mh(data, spec, mc, mix_seed.seed());
                const auto table = posterior_summary(chain, probs);
                out["iterations"] = chain.iterations;
                out["burn_in"] = chain.burn_in;
                out["draws"] = table.draws;
                out["alpha"] = summary_json(table.alpha);
                out["lambda"] = summary_json(table.lambda);
                out["mh_acceptance_rate"] = num(chain.mh_acceptance_rate);
                out["warnings"] = chain.warnings;
                out["seed"] = seed_json;
            }
        } else if (cal_normal->parsed()) {
            command = "calibrate normal";
            const auto mode = cal_mode == "prior" ? PredictiveMode::prior : PredictiveMode::posterior;
            config = {{"n", caln_n}, {"xbar", num(caln_xbar)}, {"mode", cal_mode}, {"n_rep", cal_nrep}};
            seed_json = cal_seed.describe();
            const NormalSummary obs(caln_n, caln_xbar);
            const std::function<double(const NormalSummary&)> stat = [](const NormalSummary& s) {
                return -log_bf10_normal(s).log_bf;
            };
            const auto rep = predictive_bf_tails(obs, normal_null_model(), normal_alternative_model(), stat, mode,
                                                 cal_nrep, cal_seed.seed(), "log_bf01_normal");
            out = {{"command", command},
                   {"observed_log_bf01", num(stat(obs))},
                   {"p0", num(rep.p0)},
                   {"p1", num(rep.p1)},
                   {"mc_se0", num(rep.mc_se0)},
                   {"mc_se1", num(rep.mc_se1)},
                   {"n_rep", rep.n_rep},
                   {"mode", std::string(to_string(rep.mode))},
                   {"statistic", rep.statistic},
                   {"method", std::string(to_string(EvidenceMethod::closed_form))},
                   {"seed", seed_json}};
        } else if (cal_pg->parsed()) {
            command = "calibrate poisgeo";
            config = calpg_data.describe();
            config["n_rep"] = cal_nrep;
            seed_json = cal_seed.describe();
            const auto data = calpg_data.load();
            const std::function<double(const CountDataset&)> stat = [](const CountDataset& d) {
                return log_bf12_shared_improper(d).log_bf;
            };
            const auto rep = predictive_bf_tails(data, count_model(CountFamily::poisson),
                                                 count_model(CountFamily::geometric), stat, PredictiveMode::posterior,
                                                 cal_nrep, cal_seed.seed(), "log_bf12_shared_improper");
            out = {{"command", command},
                   {"observed_log_bf12", num(stat(data))},
                   {"p_poisson", num(rep.p0)},
                   {"p_geometric", num(rep.p1)},
                   {"mc_se_poisson", num(rep.mc_se0)},
                   {"mc_se_geometric", num(rep.mc_se1)},
                   {"n_rep", rep.n_rep},
                   {"mode", std::string(to_string(rep.mode))},
                   {"statistic", rep.statistic},
                   {"method", std::string(to_string(EvidenceMethod::closed_form))},
                   {"improper_prior", true},
                   {"degenerate_redraws", rep.degenerate_redraws},
                   {"seed", seed_json}};
        } else if (cal_alpha->parsed()) {
            command = "calibrate alpha";
            config = {{"a0", num(cala_a0)},         {"generator", cala_generator}, {"lambda", num(cala_lambda)},
                      {"n_obs", cala_nobs},         {"replicas", cala_reps},       {"iters", cala_iters},
                      {"burn_in", cala_burn},       {"summary", cala_summary},     {"q", num(cala_q)}};
            seed_json = cal_seed.describe();
            const auto res = bootstrap_alpha_cutoff(
                MixtureSpec(cala_a0), parse_family(cala_generator), cala_lambda, cala_nobs, cala_reps,
                mcmc_from(cala_iters, cala_burn), cala_summary == "mean" ? AlphaSummary::mean : AlphaSummary::median,
                cala_q, cal_seed.seed());
            json summaries = json::array();
            for (double v : res.summaries) summaries.push_back(num(v));
            out = {{"command", command},
                   {"cutoff", num(res.cutoff)},
                   {"q", num(res.q)},
                   {"replicas", res.summaries.size()},
                   {"degenerate_redraws", res.degenerate_redraws},
                   {"summaries", summaries},
                   {"seed", seed_json}};
        } else if (cal_ppp->parsed()) {
            command = "calibrate ppp";
            config = ppp_data.describe();
            config.update({{"family", ppp_family}, {"discrepancy", ppp_disc}, {"draws", ppp_draws}, {"n_rep", ppp_nrep}});
            seed_json = cal_seed.describe();
            const auto data = ppp_data.load();
            const auto family = parse_family(ppp_family);
            if (data.all_zero())
                throw ImproperEvidenceError("calibrate ppp: all observations are zero, so the 1/lambda posterior is improper");
            if (ppp_draws == 0) throw DomainError("--draws must be positive");
            Rng rng(cal_seed.seed().child({7}));
            std::vector<double> lambdas(ppp_draws);
            for (auto& l : lambdas)
                l = family == CountFamily::poisson ? sample_poisson_posterior_lambda(data, rng)
                                                   : sample_geometric_posterior_lambda(data, rng);
            Discrepancy T = discrepancy::sample_variance;
            if (ppp_disc == "mean") T = discrepancy::sample_mean;
            if (ppp_disc == "max") T = discrepancy::maximum;
            if (ppp_disc == "zeros") T = discrepancy::zero_count;
            const auto tail = posterior_predictive_pvalue(data, lambdas, family, T, ppp_nrep, cal_seed.seed());
            out = {{"command", command},
                   {"family", ppp_family},
                   {"discrepancy", ppp_disc},
                   {"p_value", num(tail.p)},
                   {"mc_se", num(tail.mc_se)},
                   {"n_rep", tail.n_rep},
                   {"seed", seed_json}};
        } else if (exp->parsed()) {
            command = "experiment " + exp_kind;
            const auto kind = *parse_experiment(exp_kind);
            auto cfg = ExperimentConfig::defaults(kind, exp_full);
            cfg.seed = exp_seed.seed();
            cfg.output_dir = exp_out;
            if (exp_reps > 0) cfg.replicas = exp_reps;
            if (!exp_ngrid.empty()) cfg.n_grid = parse_size_list(exp_ngrid, "--n-grid");
            if (!exp_a0.empty()) cfg.a0_list = parse_double_list(exp_a0, "--a0-list");
            if (exp_lambda != 0.0) cfg.lambda_true = exp_lambda;
            if (exp_iters > 0) cfg.mcmc.iterations = exp_iters;
            if (exp->count("--burn-in") > 0) cfg.mcmc.burn_in = exp_burn;
            if (!exp_quantiles.empty()) cfg.ribbon_quantiles = parse_double_list(exp_quantiles, "--ribbon-quantiles");
            cfg.t = exp_t;

            json grid = json::array(), a0s = json::array(), rq = json::array();
            for (auto n : cfg.n_grid) grid.push_back(n);
            for (auto a : cfg.a0_list) a0s.push_back(num(a));
            for (auto p : cfg.ribbon_quantiles) rq.push_back(num(p));
            config = {{"experiment", exp_kind}, {"n_grid", grid}, {"replicas", cfg.replicas}};
            if (kind == Experiment::fig2 || kind == Experiment::fig3)
                config.update({{"a0_list", a0s},
                               {"lambda_true", num(cfg.lambda_true)},
                               {"iterations", cfg.mcmc.iterations},
                               {"burn_in", cfg.mcmc.burn_in}});
            if (kind == Experiment::lindley) config["t"] = num(cfg.t);
            if (kind != Experiment::lindley) config["ribbon_quantiles"] = rq;
            config["full_scale"] = exp_full;
            seed_json = exp_seed.describe();

            const auto res = run_experiment(cfg);
            for (const auto& note : res.notes) std::cerr << "[" << exp_kind << "] " << note << "\n";
            auto artifacts = experiment_artifacts(res);
            written = write_artifacts(artifacts, exp_out);

            json names = json::array();
            for (const auto& [name, _] : artifacts) names.push_back(name);
            const std::size_t rows = res.fig1.size() + res.mixture.size() + res.lindley.size();
            out = {{"command", command},
                   {"output_dir", exp_out},
                   {"artifacts", names},
                   {"rows", rows},
                   {"degenerate_redraws", res.degenerate_redraws},
                   {"notes", res.notes},
                   {"seed", seed_json}};
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            const fs::path mpath = fs::path(exp_out) / (exp_kind + "_manifest.json");
            write_manifest(mpath, command, config, seed_json, artifacts, wall);
            written.push_back(mpath);
        } else if (lin->parsed()) {
            command = "lindley";
            const auto ns = parse_size_list(lin_n, "--n");
            config = {{"t", num(lin_t)}, {"n", lin_n}};
            const auto res = run_lindley(lin_t, ns);
            json rows = json::array();
            for (const auto& r : res.lindley) rows.push_back({{"n", r.n}, {"log_bf01", num(r.log_bf01)}});
            out = {{"command", command}, {"t", num(lin_t)}};
            if (res.lindley.size() == 1) {
                out["n"] = res.lindley[0].n;
                out["log_bf01"] = num(res.lindley[0].log_bf01);
            }
            out["rows"] = rows;
        }

        const std::string text = out.dump(2) + "\n";
        if (!manifest_path.empty()) {
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            write_manifest(manifest_path, command, config, seed_json, {{"stdout.json", text}}, wall);
        }
        std::cout << text;
        return 0;
    } catch (const ImproperEvidenceError& e) {
        std::cerr << "degenerate input (improper marginal likelihood): " << e.what() << "\n";
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        return kExitDegenerate;
    } catch (const DegeneracyError& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        return kExitDegenerate;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy failure: " << e.what() << " (last estimate " << fmt_g10(e.estimate()) << ")\n";
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        return kExitAccuracy;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        return 1;
    }
}
