// Acceptance gate: runs every quantitative criterion end to end and prints
// one PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "graphsmooth/graphsmooth.hpp"

using namespace graphsmooth;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %-34s %s\n", ok ? "PASS" : "FAIL", index,
                name.c_str(), detail.c_str());
    if (!ok) ++failures;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

StackedSignal random_signal(int n, int t, Rng& rng) {
    StackedSignal x(n, t);
    for (double& v : x.data) v = rng.normal();
    return x;
}

double rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// --- criterion 1: lemma bound validity sweep ------------------------------
void criterion_lemma_sweep() {
    const double t0 = now_seconds();
    const LemmaVerifyReport r = verify_lemma(2025, 200);
    const double elapsed = now_seconds() - t0;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d/200 cases, worst margin %.3e, %.1fs",
                  r.passes, r.worst_margin, elapsed);
    report(1, "lemma bound validity", r.passes == 200 && elapsed < 30.0, detail);
}

// --- criterion 2: sync-variant bound validity -----------------------------
void criterion_sync_sweep() {
    const LemmaVerifyReport r = verify_lemma_sync(2025, 100);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d/100 cases, worst margin %.3e", r.passes,
                  r.worst_margin);
    report(2, "sync bound validity", r.passes == 100, detail);
}

// --- criterion 3: solver-oracle equivalence -------------------------------
void criterion_solver_oracle() {
    int passes = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Rng rng(derive_trial_seed(7100, 5, k));
        const Graph g = detail::random_test_graph(rng);
        const bool centered = k % 2 == 1;
        const int t = g.vertex_count();
        const int n = std::min(48 / t, centered ? 4 : 3);
        SolveOptions opts;
        opts.mu = std::pow(10.0, -2.0 + 4.0 * rng.uniform());

        SolveReport solved;
        StackedSignal oracle;
        if (centered) {
            const MeasurementSet m =
                detail::random_incidence_measurements(std::max(n, 3), t, rng);
            std::vector<double> y(m.total_rows());
            for (double& v : y) v = rng.normal();
            opts.mode = SolveMode::centered;
            solved = solve_sync(g, m, y, opts);
            oracle = dense_oracle_solve(g, m, y, opts.mu, SolveMode::centered);
        } else {
            const MeasurementSet m = detail::random_full_rank_measurements(n, t, rng);
            std::vector<double> y(m.total_rows());
            for (double& v : y) v = rng.normal();
            solved = solve_penalized(g, m, y, opts);
            oracle = dense_oracle_solve(g, m, y, opts.mu, SolveMode::plain);
        }
        const double err = rel_err(solved.estimate.data, oracle.data);
        worst = std::max(worst, err);
        if (solved.converged && err <= 1e-8) ++passes;
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "%d/100 instances, worst rel err %.3e", passes,
                  worst);
    report(3, "solver-oracle equivalence", passes == 100, detail);
}

// --- criterion 4: exact recovery in the degenerate cases ------------------
void criterion_exact_recovery() {
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Rng rng(derive_trial_seed(7200, 4, k));
        const Graph g = detail::random_test_graph(rng);
        const int t = g.vertex_count();

        // plain: block-constant x, full-rank gram, zero noise
        {
            const int n = 2 + rng.uniform_index(2);
            const MeasurementSet m = detail::random_full_rank_measurements(n, t, rng);
            StackedSignal x(n, t);
            for (int i = 0; i < n; ++i) {
                const double v = rng.normal();
                for (int node = 0; node < t; ++node) x.at(node, i) = v;
            }
            SolveOptions opts;
            opts.mu = 0.5 + rng.uniform();
            const SolveReport r = solve_penalized(g, m, design_apply(m, x), opts);
            for (std::size_t i = 0; i < x.data.size(); ++i)
                worst = std::max(worst, std::abs(r.estimate.data[i] - x.data[i]));
        }
        // centered: identical centered block at every node, zero noise
        {
            const int n = 3 + rng.uniform_index(2);
            const MeasurementSet m = detail::random_incidence_measurements(n, t, rng);
            StackedSignal x(n, t);
            std::vector<double> base(n);
            for (double& v : base) v = rng.normal();
            for (int node = 0; node < t; ++node)
                for (int i = 0; i < n; ++i) x.at(node, i) = base[i];
            center_blocks_inplace(x);
            SolveOptions opts;
            opts.mu = 0.5 + rng.uniform();
            opts.mode = SolveMode::centered;
            const SolveReport r = solve_sync(g, m, design_apply(m, x), opts);
            for (std::size_t i = 0; i < x.data.size(); ++i)
                worst = std::max(worst, std::abs(r.estimate.data[i] - x.data[i]));
        }
    }
    ok = worst <= 1e-8;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "worst per-entry error %.3e", worst);
    report(4, "exact recovery degenerate cases", ok, detail);
}

// --- criterion 5: measured bias term against its theoretical envelope ------
void criterion_bias_bound() {
    int passes = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
        Rng rng(derive_trial_seed(7300, 3, k));
        const Graph g = detail::random_test_graph(rng);
        const int n = 2 + rng.uniform_index(2);
        const MeasurementSet m = detail::random_full_rank_measurements(n, g.vertex_count(), rng);
        const StackedSignal x = random_signal(n, g.vertex_count(), rng);
        SolveOptions opts;
        opts.mu = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
        const BiasVarianceSplit split = bias_variance_split(
            g, m, x, std::vector<double>(m.total_rows(), 0.0), opts);
        const BoundInputs in = bound_inputs_from(g, m, gram_summary(m), opts.mu, false);
        const double bound = 4.0 * opts.mu * quadratic_variation(g, x) / lambda_bar(in);
        worst_excess = std::max(worst_excess, split.e1 - bound);
        if (split.e1 <= bound + 1e-8) ++passes;
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "%d/100 instances, worst E1-bound %.3e", passes,
                  worst_excess);
    report(5, "bias-bound conformance", passes == 100, detail);
}

// --- criterion 6: measured variance term, tight form at delta = e^-2 ------
void criterion_variance_bound() {
    const double delta = std::exp(-2.0);
    const double sigma = 1.0;
    int exceed = 0, total = 0;
    for (int inst = 0; inst < 20; ++inst) {
        Rng rng(derive_trial_seed(7400, 6, inst));
        const Graph g = detail::random_test_graph(rng);
        const int n = 2 + rng.uniform_index(2);
        const MeasurementSet m = detail::random_full_rank_measurements(n, g.vertex_count(), rng);
        const GramSummary gram = gram_summary(m);
        SolveOptions opts;
        opts.mu = std::pow(10.0, -1.0 + 2.0 * rng.uniform());

        const BoundInputs in = bound_inputs_from(g, m, gram, opts.mu, false);
        const BoundReport bound =
            error_bound(in, laplacian_spectrum(g), n, sigma, gram.design_norm, 0.0, delta,
                        VarianceForm::tight);

        const StackedSignal zero(n, g.vertex_count());
        for (int draw = 0; draw < 500; ++draw) {
            const std::vector<double> eta = gen_noise(m.total_rows(), sigma, rng);
            const BiasVarianceSplit split = bias_variance_split(g, m, zero, eta, opts);
            ++total;
            if (split.e2 > bound.variance_bound) ++exceed;
        }
    }
    const double rate = static_cast<double>(exceed) / total;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "exceed rate %.4f (%d/%d draws)", rate, exceed,
                  total);
    report(6, "variance-bound conformance", rate <= 0.05, detail);
}

// --- criterion 7: Prop 2 empirical sandwich --------------------------------
void criterion_prop2() {
    const SamplingVerifyReport r = verify_prop2(5, 0.5, 0.05, 369, 200, 2025);
    char detail[120];
    std::snprintf(detail, sizeof(detail), "joint sandwich rate %.3f (need >= 0.90)",
                  r.spectrum_rate());
    report(7, "sparse-sampling Gram sandwich", r.spectrum_rate() >= 0.90, detail);
}

// --- criterion 8: Prop 5 empirical sandwich --------------------------------
void criterion_prop5() {
    const SamplingVerifyReport r = verify_prop5(30, 50, 0.05, 0.05, 200, 2025);
    char detail[140];
    std::snprintf(detail, sizeof(detail),
                  "lambda_{n-1} rate %.3f, norm rate %.3f (need >= 0.95)",
                  r.spectrum_rate(), r.norm_rate());
    report(8, "ER-layer spectrum bounds", r.spectrum_rate() >= 0.95 && r.norm_rate() >= 0.95,
           detail);
}

// --- criterion 9: weak-consistency trends ----------------------------------
void criterion_trends() {
    const std::vector<std::string> presets = preset_names();
    bool all_ok = true;
    std::string detail;
    for (const std::string& name : presets) {
        const double t0 = now_seconds();
        const ExperimentConfig cfg = preset_config(name);
        const ExperimentResult result = run_experiment(cfg);
        const double elapsed = now_seconds() - t0;
        const double first = result.aggregates.front().median_mse;
        const double last = result.aggregates.back().median_mse;
        const bool ok = std::isfinite(first) && std::isfinite(last) &&
                        last < 0.5 * first && elapsed < 600.0;
        all_ok = all_ok && ok;
        char line[200];
        std::snprintf(line, sizeof(line), "\n    %-22s median %.4f -> %.4f (ratio %.3f) %.0fs%s",
                      name.c_str(), first, last,
                      std::isfinite(first) && first > 0 ? last / first : -1.0, elapsed,
                      ok ? "" : "  <- FAIL");
        detail += line;
    }
    report(9, "weak-consistency trends", all_ok, detail);
}

// --- criterion 10: mu* formula spot checks ---------------------------------
void criterion_mu_star() {
    const double v1 = mu_star_complete(8.0, 8.0, 1, 1.0, 1.0, 1.0, 8, 2.0);
    const double e1 = std::max(std::cbrt(2.0) * 2.0 / 4.0 - 0.125, 0.5);
    const double v2 = mu_star_star_graph(27.0, 27.0, 1, 1.0, 1.0, 1.0, 27, 1.0);
    const double e2 = 3.0 * std::cbrt(2.0) - 1.0;
    const double s_t = std::sqrt(1000.0);
    const double v3 = mu_star_rand_samp(0.5, 1000, 5, 1.0, s_t, 2.0, GraphKind::complete);
    const double e3 = std::max(std::cbrt(0.5 / (1000.0 * s_t)) - 0.0001, 0.002);
    const bool ok = std::abs(v1 - e1) <= 1e-12 * e1 && std::abs(v2 - e2) <= 1e-12 * e2 &&
                    std::abs(v3 - e3) <= 1e-12 * e3;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%.12f / %.12f / %.12f", v1, v2, v3);
    report(10, "mu* hand-arithmetic checks", ok, detail);
}

// --- criterion 11: determinism across worker counts ------------------------
void criterion_determinism() {
    ExperimentConfig cfg = preset_config("fig1-star-theta05");
    cfg.t_grid = {50, 100};
    cfg.trials = 8;
    RunOptions one;
    one.threads = 1;
    RunOptions eight;
    eight.threads = 8;
    const std::string a = archive_to_json(run_experiment(cfg, one)).dump(2);
    const std::string b = archive_to_json(run_experiment(cfg, eight)).dump(2);
    char detail[120];
    std::snprintf(detail, sizeof(detail), "archives %s (%zu bytes)",
                  a == b ? "identical" : "differ", a.size());
    report(11, "scheduling determinism", a == b, detail);
}

} // namespace

int main() {
    std::printf("graphsmooth acceptance suite (%s)\n", kVersion);
    criterion_lemma_sweep();
    criterion_sync_sweep();
    criterion_solver_oracle();
    criterion_exact_recovery();
    criterion_bias_bound();
    criterion_variance_bound();
    criterion_prop2();
    criterion_prop5();
    criterion_trends();
    criterion_mu_star();
    criterion_determinism();
    std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
