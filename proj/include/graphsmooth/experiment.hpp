#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "graphsmooth/bounds.hpp"
#include "graphsmooth/graph.hpp"
#include "graphsmooth/measurement.hpp"
#include "graphsmooth/rng.hpp"
#include "graphsmooth/signal_gen.hpp"
#include "graphsmooth/solver.hpp"
#include "graphsmooth/stacked_signal.hpp"
#include "graphsmooth/version.hpp"

namespace graphsmooth {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MeasurementModel { sparse_rows, er_layers };
enum class MuRule { corollary_auto, fixed };

/// Smoothness budget as a function of T: c, c*sqrt(T) or c*T^a.
struct STRule {
    enum class Form { constant, sqrt_t, pow_t };
    Form form = Form::sqrt_t;
    double c = 1.0;
    double a = 0.5;

    double eval(int t) const {
        switch (form) {
            case Form::constant: return c;
            case Form::sqrt_t: return c * std::sqrt(static_cast<double>(t));
            default: return c * std::pow(static_cast<double>(t), a);
        }
    }

    std::string str() const {
        std::ostringstream os;
        os.precision(17);
        switch (form) {
            case Form::constant: os << "const " << c; break;
            case Form::sqrt_t: os << "sqrt " << c; break;
            default: os << "pow " << c << ' ' << a; break;
        }
        return os.str();
    }

    static STRule parse(const std::string& text) {
        std::istringstream is(text);
        std::string kind;
        if (!(is >> kind)) throw config_error("st_rule: empty");
        STRule rule;
        if (kind == "const") {
            rule.form = Form::constant;
            if (!(is >> rule.c)) throw config_error("st_rule: 'const <c>' expected");
        } else if (kind == "sqrt") {
            rule.form = Form::sqrt_t;
            rule.c = 1.0;
            is >> rule.c;
        } else if (kind == "pow") {
            rule.form = Form::pow_t;
            if (!(is >> rule.c >> rule.a)) throw config_error("st_rule: 'pow <c> <a>' expected");
        } else {
            throw config_error("st_rule: unknown form '" + kind + "'");
        }
        if (!(rule.c >= 0.0)) throw config_error("st_rule: coefficient must be >= 0");
        return rule;
    }
};

struct ExperimentConfig {
    std::string name = "custom";
    GraphKind graph_kind = GraphKind::star;
    MeasurementModel model = MeasurementModel::sparse_rows;
    double theta = 0.5; // sparse_rows
    double er_p = 0.02; // er_layers, shared across layers
    int n = 5;
    double sigma = 1.0;
    STRule st_rule;
    std::vector<int> t_grid;
    int trials = 50;
    std::uint64_t base_seed = 20250401;
    MuRule mu_rule = MuRule::corollary_auto;
    double mu_fixed = 1.0;
    double c1 = 0.0; // 0 -> default: 2 for complete, 3 for star
    double c2 = 2.0;
    double delta = 0.05; // gamma_{n,T} / hypothesis-warning confidence

    double effective_c1() const {
        if (c1 > 0.0) return c1;
        return graph_kind == GraphKind::complete ? 2.0 : 3.0;
    }

    void validate() const {
        if (graph_kind != GraphKind::complete && graph_kind != GraphKind::star &&
            graph_kind != GraphKind::path)
            throw config_error("config: graph must be complete, star or path");
        if (n < 1) throw config_error("config: n must be >= 1");
        if (model == MeasurementModel::er_layers && n < 2)
            throw config_error("config: er_layers model needs n >= 2");
        if (!(sigma >= 0.0)) throw config_error("config: sigma must be >= 0");
        if (!(theta >= 0.0 && theta <= 1.0)) throw config_error("config: theta in [0,1]");
        if (!(er_p >= 0.0 && er_p <= 1.0)) throw config_error("config: p in [0,1]");
        if (t_grid.empty()) throw config_error("config: T_grid must be non-empty");
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (t_grid[i] < 2) throw config_error("config: every T must be >= 2");
            if (i > 0 && t_grid[i] <= t_grid[i - 1])
                throw config_error("config: T_grid must be strictly increasing");
        }
        if (trials < 1) throw config_error("config: trials must be >= 1");
        if (mu_rule == MuRule::fixed && !(mu_fixed > 0.0))
            throw config_error("config: fixed mu must be > 0");
        if (mu_rule == MuRule::corollary_auto && graph_kind == GraphKind::path)
            throw config_error("config: no corollary mu rule exists for the path graph; "
                               "use mu_rule = fixed");
        if (!(delta > 0.0 && delta < 1.0)) throw config_error("config: delta in (0,1)");
        if (!(c2 > 0.0)) throw config_error("config: c2 must be > 0");
    }
};

struct TrialRow {
    int t = 0;
    int trial = 0;
    double mse = std::numeric_limits<double>::quiet_NaN();
    double realized_s_t = 0.0;
    double mu_used = 0.0;
    int solver_iterations = 0;
    bool converged = false;
    bool solved = false; // false when the trial's system was rank deficient
};

struct TAggregate {
    int t = 0;
    double mean_mse = 0.0;
    double median_mse = 0.0;
    double std_mse = 0.0;
    int trials = 0;    // rows entering the aggregate
    int solved = 0;    // rows with a finite mse
    int converged = 0; // rows whose CG met the tolerance
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string version;
    std::vector<TrialRow> rows; // ordered by (T index, trial)
    std::vector<TAggregate> aggregates;
};

namespace detail {

inline Graph make_graph(GraphKind kind, int t) {
    switch (kind) {
        case GraphKind::complete: return build_complete(t);
        case GraphKind::star: return build_star(t);
        case GraphKind::path: return build_path(t);
        default: throw config_error("make_graph: unsupported kind");
    }
}

/// The corollary penalty with a zero smoothness target degenerates to the
/// constant branch of the rule.
inline double auto_mu_sparse(const ExperimentConfig& cfg, int t, double s_target) {
    if (s_target > 0.0)
        return mu_star_rand_samp(cfg.theta, t, cfg.n, cfg.sigma, s_target,
                                 cfg.effective_c1(), cfg.graph_kind);
    return cfg.graph_kind == GraphKind::complete ? cfg.effective_c1() / t
                                                 : cfg.effective_c1();
}

inline double auto_mu_sync(const ExperimentConfig& cfg, int t, double s_target,
                           double p_sum, double p_max) {
    const double gamma = gamma_n_t(cfg.n, t, p_max, cfg.delta);
    if (s_target > 0.0)
        return mu_star_sync(p_sum, gamma, cfg.n, cfg.sigma, s_target, t, cfg.c2,
                            cfg.graph_kind);
    return (cfg.c2 / t) * (cfg.n * p_sum / t + gamma * gamma);
}

/// Star graphs use the hub-anchored recipe; every other graph uses the
/// complete-graph recipe, whose pairwise expectation bounds the quadratic
/// variation of any edge subset.
inline SmoothnessBudget trial_budget(GraphKind kind, double s_target) {
    return SmoothnessBudget{s_target, kind == GraphKind::star
                                          ? SmoothnessLaw::star_recipe
                                          : SmoothnessLaw::complete_recipe};
}

} // namespace detail

/// Runs one Monte-Carlo cell: sample measurements, generate ground truth
/// (centered per block in the synchronization model), observe, solve, score.
/// The cell's stream is derived from (base_seed, T, trial_index) only, so any
/// cell can be reproduced in isolation.
inline TrialRow run_trial(const ExperimentConfig& cfg, int t_nodes, int trial_index) {
    TrialRow row;
    row.t = t_nodes;
    row.trial = trial_index;

    Rng rng(derive_trial_seed(cfg.base_seed, static_cast<std::uint64_t>(t_nodes),
                              static_cast<std::uint64_t>(trial_index)));
    const Graph g = detail::make_graph(cfg.graph_kind, t_nodes);
    const double s_target = cfg.st_rule.eval(t_nodes);

    SolveOptions opts;
    StackedSignal x(cfg.n, t_nodes);
    std::vector<double> y;

    if (cfg.model == MeasurementModel::sparse_rows) {
        const MeasurementSet m = sample_sparse_rows(cfg.n, t_nodes, cfg.theta, rng);
        x = gen_smooth(cfg.n, t_nodes, detail::trial_budget(cfg.graph_kind, s_target), rng);
        y = design_apply(m, x);
        const std::vector<double> eta = gen_noise(m.total_rows(), cfg.sigma, rng);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += eta[i];

        opts.mode = SolveMode::plain;
        opts.mu = cfg.mu_rule == MuRule::fixed ? cfg.mu_fixed
                                               : detail::auto_mu_sparse(cfg, t_nodes, s_target);
        row.mu_used = opts.mu;
        row.realized_s_t = quadratic_variation(g, x);
        try {
            SolveReport report = solve_penalized(g, m, y, opts);
            row.solved = true;
            row.converged = report.converged;
            row.solver_iterations = report.iterations;
            double err = 0.0;
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                const double d = report.estimate.data[i] - x.data[i];
                err += d * d;
            }
            row.mse = err / t_nodes;
        } catch (const singular_system_error&) {
            row.solved = false;
        }
        return row;
    }

    const ErLayers er = sample_er_layers(cfg.n, std::vector<double>(t_nodes, cfg.er_p), rng);
    x = gen_smooth(cfg.n, t_nodes, detail::trial_budget(cfg.graph_kind, s_target), rng);
    center_blocks_inplace(x);
    y = design_apply(er.measurements, x);
    const std::vector<double> eta = gen_noise(er.measurements.total_rows(), cfg.sigma, rng);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += eta[i];

    opts.mode = SolveMode::centered;
    opts.mu = cfg.mu_rule == MuRule::fixed
                  ? cfg.mu_fixed
                  : detail::auto_mu_sync(cfg, t_nodes, s_target, er.p_sum, er.p_max);
    row.mu_used = opts.mu;
    row.realized_s_t = quadratic_variation(g, x);
    try {
        SolveReport report = solve_sync(g, er.measurements, y, opts);
        row.solved = true;
        row.converged = report.converged;
        row.solver_iterations = report.iterations;
        double err = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double d = report.estimate.data[i] - x.data[i];
            err += d * d;
        }
        row.mse = err / t_nodes;
    } catch (const singular_system_error&) {
        row.solved = false;
    }
    return row;
}

namespace detail {

inline TAggregate aggregate_rows(int t, const std::vector<const TrialRow*>& rows,
                                 bool strict) {
    TAggregate agg;
    agg.t = t;
    std::vector<double> values;
    for (const TrialRow* row : rows) {
        if (!row->solved) continue;
        if (strict && !row->converged) continue;
        values.push_back(row->mse);
        ++agg.trials;
        if (row->converged) ++agg.converged;
    }
    for (const TrialRow* row : rows)
        if (row->solved) ++agg.solved;
    if (values.empty()) {
        agg.mean_mse = agg.median_mse = agg.std_mse =
            std::numeric_limits<double>::quiet_NaN();
        return agg;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean_mse = sum / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - agg.mean_mse) * (v - agg.mean_mse);
    agg.std_mse = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    agg.median_mse = sorted.size() % 2 == 1
                         ? sorted[mid]
                         : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return agg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["graph"] = to_string(cfg.graph_kind);
    j["model"] = cfg.model == MeasurementModel::sparse_rows ? "sparse_rows" : "er_layers";
    j["theta"] = cfg.theta;
    j["p"] = cfg.er_p;
    j["n"] = cfg.n;
    j["sigma"] = cfg.sigma;
    j["st_rule"] = cfg.st_rule.str();
    j["t_grid"] = cfg.t_grid;
    j["trials"] = cfg.trials;
    j["base_seed"] = cfg.base_seed;
    j["mu_rule"] = cfg.mu_rule == MuRule::corollary_auto ? "corollary_auto" : "fixed";
    j["mu"] = cfg.mu_fixed;
    j["c1"] = cfg.c1;
    j["c2"] = cfg.c2;
    j["delta"] = cfg.delta;
    return j;
}

inline nlohmann::json row_to_json(const TrialRow& row) {
    nlohmann::json j;
    j["T"] = row.t;
    j["trial"] = row.trial;
    if (std::isfinite(row.mse))
        j["mse"] = row.mse;
    else
        j["mse"] = nullptr;
    j["realized_s_t"] = row.realized_s_t;
    j["mu"] = row.mu_used;
    j["iterations"] = row.solver_iterations;
    j["converged"] = row.converged;
    j["solved"] = row.solved;
    return j;
}

inline TrialRow row_from_json(const nlohmann::json& j) {
    TrialRow row;
    row.t = j.at("T").get<int>();
    row.trial = j.at("trial").get<int>();
    row.mse = j.at("mse").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                    : j.at("mse").get<double>();
    row.realized_s_t = j.at("realized_s_t").get<double>();
    row.mu_used = j.at("mu").get<double>();
    row.solver_iterations = j.at("iterations").get<int>();
    row.converged = j.at("converged").get<bool>();
    row.solved = j.at("solved").get<bool>();
    return row;
}

} // namespace detail

inline nlohmann::json archive_to_json(const ExperimentResult& result) {
    nlohmann::json j;
    j["schema"] = "graphsmooth-experiment-v1";
    j["version"] = result.version;
    j["config"] = detail::config_to_json(result.config);
    j["rows"] = nlohmann::json::array();
    for (const TrialRow& row : result.rows) j["rows"].push_back(detail::row_to_json(row));
    j["aggregates"] = nlohmann::json::array();
    for (const TAggregate& agg : result.aggregates) {
        nlohmann::json a;
        a["T"] = agg.t;
        a["mean_mse"] = agg.mean_mse;
        a["median_mse"] = agg.median_mse;
        a["std_mse"] = agg.std_mse;
        a["trials"] = agg.trials;
        a["solved"] = agg.solved;
        a["converged"] = agg.converged;
        j["aggregates"].push_back(a);
    }
    return j;
}

struct RunOptions {
    int threads = 0;            // 0 -> GRAPHSMOOTH_THREADS env, else hardware
    std::string out_prefix;     // empty -> no persistence
    bool strict = false;        // exclude non-converged rows from aggregates
    bool resume = true;         // reuse <out>.partial.jsonl cells when present
};

/// Writes <prefix>.csv with per-T aggregates and <prefix>.json with the full
/// per-trial archive.
inline void emit_series(const ExperimentResult& result, const std::string& prefix) {
    {
        std::ofstream csv(prefix + ".csv");
        if (!csv) throw std::runtime_error("emit_series: cannot open " + prefix + ".csv");
        csv << "T,mean_mse,median_mse,std_mse,trials\n";
        csv.precision(17);
        for (const TAggregate& agg : result.aggregates)
            csv << agg.t << ',' << agg.mean_mse << ',' << agg.median_mse << ','
                << agg.std_mse << ',' << agg.trials << '\n';
        if (!csv) throw std::runtime_error("emit_series: write failed on CSV");
    }
    std::ofstream js(prefix + ".json");
    if (!js) throw std::runtime_error("emit_series: cannot open " + prefix + ".json");
    js << archive_to_json(result).dump(2) << '\n';
    if (!js) throw std::runtime_error("emit_series: write failed on archive");
}

inline ExperimentResult load_archive(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_archive: cannot open " + path);
    nlohmann::json j;
    is >> j;
    ExperimentResult result;
    result.version = j.at("version").get<std::string>();
    const nlohmann::json& c = j.at("config");
    ExperimentConfig& cfg = result.config;
    cfg.name = c.at("name").get<std::string>();
    const std::string graph = c.at("graph").get<std::string>();
    cfg.graph_kind = graph == "complete" ? GraphKind::complete
                    : graph == "star"    ? GraphKind::star
                                         : GraphKind::path;
    cfg.model = c.at("model").get<std::string>() == "sparse_rows"
                    ? MeasurementModel::sparse_rows
                    : MeasurementModel::er_layers;
    cfg.theta = c.at("theta").get<double>();
    cfg.er_p = c.at("p").get<double>();
    cfg.n = c.at("n").get<int>();
    cfg.sigma = c.at("sigma").get<double>();
    cfg.st_rule = STRule::parse(c.at("st_rule").get<std::string>());
    cfg.t_grid = c.at("t_grid").get<std::vector<int>>();
    cfg.trials = c.at("trials").get<int>();
    cfg.base_seed = c.at("base_seed").get<std::uint64_t>();
    cfg.mu_rule = c.at("mu_rule").get<std::string>() == "fixed" ? MuRule::fixed
                                                                : MuRule::corollary_auto;
    cfg.mu_fixed = c.at("mu").get<double>();
    cfg.c1 = c.at("c1").get<double>();
    cfg.c2 = c.at("c2").get<double>();
    cfg.delta = c.at("delta").get<double>();
    for (const auto& rj : j.at("rows")) result.rows.push_back(detail::row_from_json(rj));
    for (const auto& aj : j.at("aggregates")) {
        TAggregate agg;
        agg.t = aj.at("T").get<int>();
        agg.mean_mse = aj.at("mean_mse").get<double>();
        agg.median_mse = aj.at("median_mse").get<double>();
        agg.std_mse = aj.at("std_mse").get<double>();
        agg.trials = aj.at("trials").get<int>();
        agg.solved = aj.at("solved").get<int>();
        agg.converged = aj.at("converged").get<int>();
        result.aggregates.push_back(agg);
    }
    return result;
}

/// Runs every (T, trial) cell of the configured experiment over a worker
/// pool. Rows land in preassigned slots, so the result is independent of
/// scheduling; completed cells are streamed to <out>.partial.jsonl and reused
/// on resume.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const RunOptions& options = {}) {
    cfg.validate();

    int threads = options.threads;
    if (threads <= 0) {
        if (const char* env = std::getenv("GRAPHSMOOTH_THREADS")) threads = std::atoi(env);
        if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }

    const std::string partial_path =
        options.out_prefix.empty() ? "" : options.out_prefix + ".partial.jsonl";

    std::map<std::pair<int, int>, TrialRow> done;
    if (options.resume && !partial_path.empty() && std::filesystem::exists(partial_path)) {
        std::ifstream is(partial_path);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const TrialRow row = detail::row_from_json(nlohmann::json::parse(line));
            done[{row.t, row.trial}] = row;
        }
    }

    struct Cell {
        int t;
        int trial;
        std::size_t slot;
    };
    std::vector<TrialRow> rows(cfg.t_grid.size() * cfg.trials);
    std::vector<Cell> pending;
    std::size_t slot = 0;
    for (int t : cfg.t_grid)
        for (int trial = 0; trial < cfg.trials; ++trial, ++slot) {
            if (auto it = done.find({t, trial}); it != done.end())
                rows[slot] = it->second;
            else
                pending.push_back({t, trial, slot});
        }

    std::mutex io_mutex;
    std::ofstream partial;
    if (!partial_path.empty()) {
        partial.open(partial_path, std::ios::app);
        if (!partial)
            throw std::runtime_error("run_experiment: cannot open " + partial_path);
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            try {
                const Cell& cell = pending[i];
                TrialRow row = run_trial(cfg, cell.t, cell.trial);
                rows[cell.slot] = row;
                if (partial.is_open()) {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    partial << detail::row_to_json(row).dump() << '\n';
                    partial.flush();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int pool = std::max(1, std::min<int>(threads, static_cast<int>(pending.size())));
    std::vector<std::thread> workers;
    workers.reserve(pool);
    for (int w = 0; w < pool; ++w) workers.emplace_back(worker);
    for (auto& th : workers) th.join();
    if (first_error) std::rethrow_exception(first_error);

    ExperimentResult result;
    result.config = cfg;
    result.version = kVersion;
    result.rows = std::move(rows);
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        std::vector<const TrialRow*> group;
        group.reserve(cfg.trials);
        for (int trial = 0; trial < cfg.trials; ++trial)
            group.push_back(&result.rows[ti * cfg.trials + trial]);
        result.aggregates.push_back(
            detail::aggregate_rows(cfg.t_grid[ti], group, options.strict));
    }

    if (!options.out_prefix.empty()) {
        if (partial.is_open()) partial.close();
        emit_series(result, options.out_prefix);
        std::error_code ec;
        std::filesystem::remove(partial_path, ec);
    }
    return result;
}

/// Named experiment presets. Smoothness budgets are a preset choice and are
/// labeled in each config's st_rule (all presets here use S_T = sqrt(T)).
inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.st_rule = STRule{STRule::Form::sqrt_t, 1.0, 0.5};
    cfg.trials = 50;
    cfg.base_seed = 20250401;
    if (name.rfind("fig1-", 0) == 0) {
        cfg.model = MeasurementModel::sparse_rows;
        cfg.n = 5;
        cfg.sigma = 1.0;
        cfg.t_grid = {50, 100, 200, 400};
        if (name == "fig1-star-theta02") {
            cfg.graph_kind = GraphKind::star;
            cfg.theta = 0.2;
        } else if (name == "fig1-star-theta05") {
            cfg.graph_kind = GraphKind::star;
            cfg.theta = 0.5;
        } else if (name == "fig1-complete-theta02") {
            cfg.graph_kind = GraphKind::complete;
            cfg.theta = 0.2;
        } else if (name == "fig1-complete-theta05") {
            cfg.graph_kind = GraphKind::complete;
            cfg.theta = 0.5;
        } else {
            throw config_error("unknown preset: " + name);
        }
        return cfg;
    }
    if (name.rfind("fig2-", 0) == 0) {
        cfg.model = MeasurementModel::er_layers;
        cfg.n = 50;
        cfg.sigma = 1.0;
        cfg.t_grid = {20, 40, 80};
        if (name == "fig2-star-p002") {
            cfg.graph_kind = GraphKind::star;
            cfg.er_p = 0.02;
        } else if (name == "fig2-star-p0004") {
            cfg.graph_kind = GraphKind::star;
            cfg.er_p = 0.004;
        } else if (name == "fig2-complete-p002") {
            cfg.graph_kind = GraphKind::complete;
            cfg.er_p = 0.02;
        } else if (name == "fig2-complete-p0004") {
            cfg.graph_kind = GraphKind::complete;
            cfg.er_p = 0.004;
        } else {
            throw config_error("unknown preset: " + name);
        }
        return cfg;
    }
    throw config_error("unknown preset: " + name);
}

inline std::vector<std::string> preset_names() {
    return {"fig1-star-theta02",    "fig1-star-theta05",    "fig1-complete-theta02",
            "fig1-complete-theta05", "fig2-star-p002",       "fig2-star-p0004",
            "fig2-complete-p002",    "fig2-complete-p0004"};
}

/// Parses the flat key-value experiment config format: one "key = value" per
/// line, '#' comments. A "preset" key seeds defaults which later keys
/// override.
inline ExperimentConfig parse_config_text(std::istream& is) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        std::string key, value;
        if (eq != std::string::npos) {
            key = line.substr(0, eq);
            value = line.substr(eq + 1);
        } else {
            std::istringstream ls(line);
            if (!(ls >> key)) continue;
            std::getline(ls, value);
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        key = trim(key);
        value = trim(value);
        if (key.empty()) continue;
        try {
            if (key == "preset") {
                cfg = preset_config(value);
            } else if (key == "name") {
                cfg.name = value;
            } else if (key == "graph") {
                if (value == "complete") cfg.graph_kind = GraphKind::complete;
                else if (value == "star") cfg.graph_kind = GraphKind::star;
                else if (value == "path") cfg.graph_kind = GraphKind::path;
                else throw config_error("graph must be complete|star|path");
            } else if (key == "model") {
                if (value == "sparse_rows") cfg.model = MeasurementModel::sparse_rows;
                else if (value == "er_layers") cfg.model = MeasurementModel::er_layers;
                else throw config_error("model must be sparse_rows|er_layers");
            } else if (key == "theta") {
                cfg.theta = std::stod(value);
            } else if (key == "p") {
                cfg.er_p = std::stod(value);
            } else if (key == "n") {
                cfg.n = std::stoi(value);
            } else if (key == "sigma") {
                cfg.sigma = std::stod(value);
            } else if (key == "st_rule") {
                cfg.st_rule = STRule::parse(value);
            } else if (key == "t_grid") {
                std::replace(value.begin(), value.end(), ',', ' ');
                std::istringstream vs(value);
                cfg.t_grid.clear();
                int t;
                while (vs >> t) cfg.t_grid.push_back(t);
            } else if (key == "trials") {
                cfg.trials = std::stoi(value);
            } else if (key == "base_seed") {
                cfg.base_seed = std::stoull(value);
            } else if (key == "mu_rule") {
                if (value == "corollary_auto" || value == "auto")
                    cfg.mu_rule = MuRule::corollary_auto;
                else if (value == "fixed") cfg.mu_rule = MuRule::fixed;
                else throw config_error("mu_rule must be corollary_auto|fixed");
            } else if (key == "mu") {
                cfg.mu_fixed = std::stod(value);
            } else if (key == "c1") {
                cfg.c1 = std::stod(value);
            } else if (key == "c2") {
                cfg.c2 = std::stod(value);
            } else if (key == "delta") {
                cfg.delta = std::stod(value);
            } else {
                throw config_error("unknown key '" + key + "'");
            }
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            throw config_error("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

} // namespace graphsmooth
