#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphsmooth/graphsmooth.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitVerifyFailure = 3;

graphsmooth::Graph load_graph(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw graphsmooth::config_error("cannot open graph file: " + path);
    return graphsmooth::read_edge_list(is);
}

graphsmooth::MeasurementSet load_measurements(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw graphsmooth::config_error("cannot open measurement file: " + path);
    return graphsmooth::read_measurement_csv(is);
}

std::vector<double> load_observations(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw graphsmooth::config_error("cannot open observation file: " + path);
    std::vector<double> y;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double v;
        while (ls >> v) y.push_back(v);
    }
    return y;
}

int run_simulate(const std::string& config_path, const std::string& preset,
                 std::string out_prefix, int threads, bool strict, bool no_resume) {
    graphsmooth::ExperimentConfig cfg;
    if (!preset.empty()) {
        cfg = graphsmooth::preset_config(preset);
    } else if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw graphsmooth::config_error("cannot open config: " + config_path);
        cfg = graphsmooth::parse_config_text(is);
    } else {
        throw graphsmooth::config_error("simulate needs --config or --preset");
    }
    cfg.validate();

    if (cfg.model == graphsmooth::MeasurementModel::sparse_rows &&
        cfg.mu_rule == graphsmooth::MuRule::corollary_auto) {
        for (int t : cfg.t_grid)
            if (!graphsmooth::rand_samp_sample_size_ok(cfg.n, cfg.theta, cfg.delta, t))
                std::cerr << "warning: T=" << t << " is below the sparse-sampling "
                          << "hypothesis (8n/theta) log(n/delta)\n";
    }
    if (cfg.model == graphsmooth::MeasurementModel::er_layers) {
        for (int t : cfg.t_grid)
            if (t * cfg.er_p < std::log(cfg.n / cfg.delta) / cfg.n)
                std::cerr << "warning: T=" << t
                          << " gives p_sum below the layer-concentration hypothesis\n";
    }

    if (out_prefix.empty()) out_prefix = cfg.name;
    graphsmooth::RunOptions options;
    options.threads = threads;
    options.out_prefix = out_prefix;
    options.strict = strict;
    options.resume = !no_resume;

    const graphsmooth::ExperimentResult result = graphsmooth::run_experiment(cfg, options);
    std::cout << "experiment '" << cfg.name << "' done; series written to "
              << out_prefix << ".csv / .json\n";
    for (const auto& agg : result.aggregates)
        std::cout << "  T=" << agg.t << "  median_mse=" << agg.median_mse
                  << "  mean_mse=" << agg.mean_mse << "  solved=" << agg.solved << "/"
                  << cfg.trials << "\n";
    return 0;
}

int run_verify_lemma(std::uint64_t seed, int cases, bool sync) {
    const graphsmooth::LemmaVerifyReport report =
        sync ? graphsmooth::verify_lemma_sync(seed, cases)
             : graphsmooth::verify_lemma(seed, cases);
    std::cout << "lemma" << (sync ? " (sync variant)" : "") << ": " << report.passes << "/"
              << report.cases << " cases passed; worst margin " << report.worst_margin
              << "; worst branch gap " << report.worst_branch_gap << "\n";
    return report.all_passed() ? 0 : kExitVerifyFailure;
}

int run_verify_prop2(int n, double theta, double delta, int t, int seeds,
                     std::uint64_t seed, double min_rate) {
    if (t == 0)
        t = static_cast<int>(std::ceil(8.0 * n / theta * std::log(n / delta)));
    const graphsmooth::SamplingVerifyReport report =
        graphsmooth::verify_prop2(n, theta, delta, t, seeds, seed);
    if (!report.hypothesis_ok)
        std::cerr << "warning: T below the stated sample-size hypothesis\n";
    std::cout << "prop2: sandwich held in " << report.spectrum_passes << "/" << report.seeds
              << " seeds (rate " << report.spectrum_rate() << ", T=" << t << ")\n";
    return report.spectrum_rate() >= min_rate ? 0 : kExitVerifyFailure;
}

int run_verify_prop5(int n, int t, double p, double delta, int seeds, std::uint64_t seed,
                     double min_rate) {
    const graphsmooth::SamplingVerifyReport report =
        graphsmooth::verify_prop5(n, t, p, delta, seeds, seed);
    if (!report.hypothesis_ok)
        std::cerr << "warning: p_sum below the stated concentration hypothesis\n";
    std::cout << "prop5: lambda_{n-1} window held in " << report.spectrum_passes << "/"
              << report.seeds << " seeds (rate " << report.spectrum_rate()
              << "); ||C||_2 <= gamma in " << report.norm_passes << "/" << report.seeds
              << " (rate " << report.norm_rate() << ")\n";
    return report.spectrum_rate() >= min_rate && report.norm_rate() >= min_rate
               ? 0
               : kExitVerifyFailure;
}

int run_bounds(const std::string& graph_path, const std::string& meas_path, double mu,
               bool sync, double sigma, double s_t, double delta, bool tight_variance) {
    const graphsmooth::Graph g = load_graph(graph_path);
    const graphsmooth::MeasurementSet m = load_measurements(meas_path);
    const graphsmooth::GramSummary gram = graphsmooth::gram_summary(m);
    const graphsmooth::BoundInputs in = graphsmooth::bound_inputs_from(g, m, gram, mu, sync);
    const graphsmooth::LaplacianSpectrum spectrum = graphsmooth::laplacian_spectrum(g);
    const graphsmooth::BoundReport report = graphsmooth::error_bound(
        in, spectrum, m.n(), sigma, gram.design_norm, s_t, delta,
        tight_variance ? graphsmooth::VarianceForm::tight
                       : graphsmooth::VarianceForm::envelope);

    nlohmann::json j;
    j["lambda_bar_prime"] = report.lambda_bar_prime;
    j["lambda_bar"] = report.lambda_bar;
    j["regime"] = graphsmooth::to_string(report.regime);
    j["bias_bound"] = report.bias_bound;
    j["variance_bound"] = report.variance_bound;
    j["total_bound"] = report.total_bound;
    j["delta"] = report.delta;
    std::cout << j.dump() << "\n";
    return 0;
}

int run_solve(const std::string& graph_path, const std::string& meas_path,
              const std::string& obs_path, double mu, const std::string& mode_name,
              double tol, int max_iters, const std::string& out_path) {
    const graphsmooth::Graph g = load_graph(graph_path);
    const graphsmooth::MeasurementSet m = load_measurements(meas_path);
    const std::vector<double> y = load_observations(obs_path);

    graphsmooth::SolveOptions opts;
    opts.mu = mu;
    opts.rel_tol = tol;
    opts.max_iters = max_iters;
    if (mode_name == "plain")
        opts.mode = graphsmooth::SolveMode::plain;
    else if (mode_name == "centered")
        opts.mode = graphsmooth::SolveMode::centered;
    else
        throw graphsmooth::config_error("--mode must be plain or centered");

    const graphsmooth::SolveReport report = graphsmooth::solve(g, m, y, opts);
    if (!report.converged)
        std::cerr << "warning: CG did not reach tolerance (" << report.iterations
                  << " iterations, residual " << report.final_residual << ")\n";
    else
        std::cerr << "converged in " << report.iterations << " iterations\n";

    if (out_path.empty() || out_path == "-") {
        graphsmooth::write_signal_csv(std::cout, report.estimate);
    } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot open output file: " + out_path);
        graphsmooth::write_signal_csv(os, report.estimate);
    }
    return 0;
}

int run_gen_graph(const std::string& kind, int t, double p, std::uint64_t seed,
                  const std::string& out_path) {
    graphsmooth::Rng rng(seed);
    graphsmooth::Graph g = [&]() {
        if (kind == "complete") return graphsmooth::build_complete(t);
        if (kind == "star") return graphsmooth::build_star(t);
        if (kind == "path") return graphsmooth::build_path(t);
        if (kind == "erdos-renyi") return graphsmooth::build_erdos_renyi(t, p, rng);
        throw graphsmooth::config_error("--kind must be complete|star|path|erdos-renyi");
    }();
    if (out_path.empty() || out_path == "-") {
        graphsmooth::write_edge_list(std::cout, g);
    } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot open output file: " + out_path);
        graphsmooth::write_edge_list(os, g);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"smoothness-penalized recovery of graph signals"};
    app.set_version_flag("--version", graphsmooth::kVersion);
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo experiment");
    std::string config_path, preset, out_prefix;
    int threads = 0;
    bool strict = false, no_resume = false;
    simulate->add_option("--config", config_path, "experiment config file");
    simulate->add_option("--preset", preset, "named preset (see README)");
    simulate->add_option("--out", out_prefix, "output prefix for .csv/.json");
    simulate->add_option("--threads", threads, "worker threads (0 = auto)");
    simulate->add_flag("--strict", strict, "exclude non-converged trials from aggregates");
    simulate->add_flag("--no-resume", no_resume, "ignore an existing partial file");

    // verify
    auto* verify = app.add_subcommand("verify", "run empirical validation suites");
    verify->require_subcommand(1);
    auto* vlemma = verify->add_subcommand("lemma", "closed-form eigenvalue bound sweep");
    int lemma_cases = 200;
    std::uint64_t lemma_seed = 2025;
    bool lemma_sync = false;
    vlemma->add_option("--cases", lemma_cases, "number of random instances");
    vlemma->add_option("--seed", lemma_seed, "sweep seed");
    vlemma->add_flag("--sync", lemma_sync, "check the synchronization variant");

    auto* vprop2 = verify->add_subcommand("prop2", "sparse-sampling Gram sandwich");
    int p2_n = 5, p2_t = 0, p2_seeds = 200;
    double p2_theta = 0.5, p2_delta = 0.05, p2_min_rate = 0.90;
    std::uint64_t p2_seed = 2025;
    vprop2->add_option("--n", p2_n, "signal dimension");
    vprop2->add_option("--theta", p2_theta, "sampling probability");
    vprop2->add_option("--delta", p2_delta, "confidence parameter");
    vprop2->add_option("--T", p2_t, "nodes (0 = smallest hypothesis-satisfying T)");
    vprop2->add_option("--seeds", p2_seeds, "Monte-Carlo seeds");
    vprop2->add_option("--seed", p2_seed, "base seed");
    vprop2->add_option("--min-rate", p2_min_rate, "required empirical pass rate");

    auto* vprop5 = verify->add_subcommand("prop5", "Erdos-Renyi layer spectrum bounds");
    int p5_n = 30, p5_t = 50, p5_seeds = 200;
    double p5_p = 0.05, p5_delta = 0.05, p5_min_rate = 0.95;
    std::uint64_t p5_seed = 2025;
    vprop5->add_option("--n", p5_n, "items per layer");
    vprop5->add_option("--T", p5_t, "layers");
    vprop5->add_option("--p", p5_p, "edge probability per layer");
    vprop5->add_option("--delta", p5_delta, "confidence parameter");
    vprop5->add_option("--seeds", p5_seeds, "Monte-Carlo seeds");
    vprop5->add_option("--seed", p5_seed, "base seed");
    vprop5->add_option("--min-rate", p5_min_rate, "required empirical pass rate");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "evaluate the theoretical error bound");
    std::string b_graph, b_meas;
    double b_mu = 1.0, b_sigma = 1.0, b_st = 1.0, b_delta = 0.1;
    bool b_sync = false, b_tight = false;
    bounds->add_option("--graph", b_graph, "edge-list file")->required();
    bounds->add_option("--measurements", b_meas, "measurement CSV")->required();
    bounds->add_option("--mu", b_mu, "penalty parameter")->required();
    bounds->add_flag("--sync", b_sync, "synchronization setting (lambda_{n-1} rules)");
    bounds->add_option("--sigma", b_sigma, "noise level");
    bounds->add_option("--st", b_st, "smoothness budget S_T");
    bounds->add_option("--delta", b_delta, "confidence parameter in (0, 1/e]");
    bounds->add_flag("--tight-variance", b_tight, "use the 8(1+4log(1/delta)) variance form");

    // solve
    auto* solve = app.add_subcommand("solve", "solve one recovery instance");
    std::string s_graph, s_meas, s_obs, s_mode = "plain", s_out;
    double s_mu = 1.0, s_tol = 1e-10;
    int s_max_iters = 0;
    solve->add_option("--graph", s_graph, "edge-list file")->required();
    solve->add_option("--measurements", s_meas, "measurement CSV")->required();
    solve->add_option("--observations", s_obs, "observation vector, one value per line")
        ->required();
    solve->add_option("--mu", s_mu, "penalty parameter")->required();
    solve->add_option("--mode", s_mode, "plain|centered");
    solve->add_option("--tol", s_tol, "relative residual tolerance");
    solve->add_option("--max-iters", s_max_iters, "CG iteration cap (0 = 10 nT)");
    solve->add_option("--out", s_out, "output CSV path (default stdout)");

    // gen-graph
    auto* gen = app.add_subcommand("gen-graph", "emit an edge-list file");
    std::string g_kind = "complete", g_out;
    int g_t = 10;
    double g_p = 0.5;
    std::uint64_t g_seed = 1;
    gen->add_option("--kind", g_kind, "complete|star|path|erdos-renyi");
    gen->add_option("--T", g_t, "vertex count");
    gen->add_option("--p", g_p, "edge probability (erdos-renyi)");
    gen->add_option("--seed", g_seed, "rng seed (erdos-renyi)");
    gen->add_option("--out", g_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        if (simulate->parsed())
            return run_simulate(config_path, preset, out_prefix, threads, strict, no_resume);
        if (vlemma->parsed()) return run_verify_lemma(lemma_seed, lemma_cases, lemma_sync);
        if (vprop2->parsed())
            return run_verify_prop2(p2_n, p2_theta, p2_delta, p2_t, p2_seeds, p2_seed,
                                    p2_min_rate);
        if (vprop5->parsed())
            return run_verify_prop5(p5_n, p5_t, p5_p, p5_delta, p5_seeds, p5_seed,
                                    p5_min_rate);
        if (bounds->parsed())
            return run_bounds(b_graph, b_meas, b_mu, b_sync, b_sigma, b_st, b_delta,
                              b_tight);
        if (solve->parsed())
            return run_solve(s_graph, s_meas, s_obs, s_mu, s_mode, s_tol, s_max_iters, s_out);
        if (gen->parsed()) return run_gen_graph(g_kind, g_t, g_p, g_seed, g_out);
    } catch (const graphsmooth::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
