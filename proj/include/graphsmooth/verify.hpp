#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "graphsmooth/bounds.hpp"
#include "graphsmooth/graph.hpp"
#include "graphsmooth/measurement.hpp"
#include "graphsmooth/rng.hpp"
#include "graphsmooth/solver.hpp"

namespace graphsmooth {

struct LemmaVerifyReport {
    int cases = 0;
    int passes = 0;
    double worst_margin = std::numeric_limits<double>::infinity(); // dense - bound
    double worst_branch_gap = 0.0; // relative mismatch of the two branches at threshold
    bool all_passed() const { return passes == cases; }
};

namespace detail {

/// Random graph from {complete, star, path} on a random T in [3, 8].
inline Graph random_test_graph(Rng& rng) {
    const int t = 3 + rng.uniform_index(6);
    switch (rng.uniform_index(3)) {
        case 0: return build_complete(t);
        case 1: return build_star(t);
        default: return build_path(t);
    }
}

/// Random dense-row measurement set with lambda_min(gram) clearly positive.
inline MeasurementSet random_full_rank_measurements(int n, int node_count, Rng& rng) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<MeasurementBlock> blocks(node_count);
        for (auto& block : blocks) {
            const int rows = rng.uniform_index(3); // 0, 1 or 2 rows
            for (int r = 0; r < rows; ++r) {
                SparseRow row;
                for (int c = 0; c < n; ++c) row.entries.emplace_back(c, rng.normal());
                block.rows.push_back(std::move(row));
            }
        }
        MeasurementSet m(n, std::move(blocks));
        const GramSummary gram = gram_summary(m);
        if (gram.lambda_min > 1e-3 * gram.lambda_max && gram.lambda_max > 0.0) return m;
    }
    throw std::runtime_error("random_full_rank_measurements: sampling failed");
}

/// Random Erdos-Renyi incidence layers with lambda_{n-1}(gram) clearly
/// positive (union of layers connected).
inline MeasurementSet random_incidence_measurements(int n, int node_count, Rng& rng) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> p(node_count, 0.3 + 0.5 * rng.uniform());
        MeasurementSet m = sample_er_layers(n, p, rng).measurements;
        const GramSummary gram = gram_summary(m);
        if (gram.lambda_second_min > 1e-6 &&
            gram.lambda_second_min > 1e-8 * gram.lambda_max)
            return m;
    }
    throw std::runtime_error("random_incidence_measurements: sampling failed");
}

inline double log_grid_mu(Rng& rng) {
    // log-uniform grid point in [1e-3, 1e3]: 61 points, 10 per decade
    const int idx = rng.uniform_index(61);
    return std::pow(10.0, -3.0 + idx * 0.1);
}

/// Direct numerical minimization of max{D1(alpha), D2(alpha)} over [0,1].
/// An upper bound on the true minimum, hence a valid reference for checking
/// that the closed form stays below it.
inline double alpha_grid_min(double b1, double b2, double b3, double mu, int points) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double alpha = static_cast<double>(i) / (points - 1);
        const double d1 = (1.0 - alpha) * mu * b1;
        const double d2 = alpha * b2 - std::sqrt(alpha * (1.0 - alpha)) * b3;
        best = std::min(best, std::max(d1, d2));
    }
    return best;
}

} // namespace detail

/// Sweeps random instances and checks, per case:
///   1. dense lambda_min(mu M^T M + C^T C) >= lambda_bar(mu) - 1e-10;
///   2. the closed form stays below the direct alpha-grid minimization of
///      max{D1, D2}, evaluated at the case's regime-threshold mu (where the
///      closed form is tight to within ~11%, so corruption cannot hide in
///      the bound's slack);
///   3. the two branches agree at the threshold (continuity, recorded as
///      worst_branch_gap).
/// inflate rescales lambda_bar' so tests can prove the verifier detects a
/// broken bound.
inline LemmaVerifyReport verify_lemma(std::uint64_t seed, int cases, double inflate = 1.0) {
    LemmaVerifyReport report;
    report.cases = cases;
    for (int k = 0; k < cases; ++k) {
        Rng rng(derive_trial_seed(seed, 1, static_cast<std::uint64_t>(k)));
        const Graph g = detail::random_test_graph(rng);
        const int n = 2 + rng.uniform_index(2);
        const MeasurementSet m = detail::random_full_rank_measurements(n, g.vertex_count(), rng);
        const GramSummary gram = gram_summary(m);
        const double mu = detail::log_grid_mu(rng);

        const BoundInputs in = bound_inputs_from(g, m, gram, mu, false);
        const double bound =
            std::max(inflate * lambda_bar_prime(in).value, in.lambda_min_CtC);

        const Matrix a = penalized_matrix_dense(g, m, mu);
        const double dense_min = symmetric_eigen(a, false).eigenvalues.back();

        const double margin = dense_min - bound;
        report.worst_margin = std::min(report.worst_margin, margin);

        // threshold point mu_c: evaluate the closed form against the direct
        // alpha minimization, and both branches against each other
        const double tau = graphsmooth::detail::regime_threshold(in.b2, in.b3);
        const double mu_c = tau / in.b1;
        const double at_threshold =
            graphsmooth::detail::lambda_bar_prime_large(tau, in.b2, in.b3);
        const double grid_min = detail::alpha_grid_min(in.b1, in.b2, in.b3, mu_c, 4001);
        const bool grid_ok = inflate * at_threshold <= grid_min + 1e-8;

        if (margin >= -1e-10 && grid_ok) ++report.passes;

        const double small_val = graphsmooth::detail::lambda_bar_prime_small(tau, in.b2, in.b3);
        const double gap =
            std::abs(small_val - at_threshold) / std::max(at_threshold, 1e-300);
        report.worst_branch_gap = std::max(report.worst_branch_gap, gap);
    }
    return report;
}

/// Synchronization-variant sweep: random incidence instances, checking
/// lambda_{T(n-1)}(P A P) >= lambda_bar(mu) - 1e-10 with b2 read from
/// lambda_{n-1}(O_T^T O_T).
inline LemmaVerifyReport verify_lemma_sync(std::uint64_t seed, int cases,
                                           double inflate = 1.0) {
    LemmaVerifyReport report;
    report.cases = cases;
    for (int k = 0; k < cases; ++k) {
        Rng rng(derive_trial_seed(seed, 2, static_cast<std::uint64_t>(k)));
        const Graph g = detail::random_test_graph(rng);
        const int t = g.vertex_count();
        const int n = 3 + rng.uniform_index(2); // n in {3, 4}
        const MeasurementSet m = detail::random_incidence_measurements(n, t, rng);
        const GramSummary gram = gram_summary(m);
        const double mu = detail::log_grid_mu(rng);

        const BoundInputs in = bound_inputs_from(g, m, gram, mu, true);
        const double bound =
            std::max(inflate * lambda_bar_prime(in).value, in.lambda_min_CtC);

        Matrix a = penalized_matrix_dense(g, m, mu);
        center_project_dense(a, n, t);
        const auto eigenvalues = symmetric_eigen(a, false).eigenvalues;
        const double relevant = eigenvalues[t * (n - 1) - 1];

        const double margin = relevant - bound;
        report.worst_margin = std::min(report.worst_margin, margin);
        if (margin >= -1e-10) ++report.passes;
    }
    return report;
}

struct SamplingVerifyReport {
    int seeds = 0;
    int spectrum_passes = 0; // prop2 joint sandwich / prop5 lambda_{n-1} window
    int norm_passes = 0;     // prop5 only: ||C||_2 <= gamma_{n,T}
    bool hypothesis_ok = true;
    double spectrum_rate() const { return seeds ? double(spectrum_passes) / seeds : 0.0; }
    double norm_rate() const { return seeds ? double(norm_passes) / seeds : 0.0; }
};

/// Empirical check of the sparse-random-measurement sandwich
/// theta T/(2n) I <= O_T^T O_T <= 2 e theta T / n I.
inline SamplingVerifyReport verify_prop2(int n, double theta, double delta, int t,
                                         int seeds, std::uint64_t base_seed) {
    SamplingVerifyReport report;
    report.seeds = seeds;
    report.hypothesis_ok = rand_samp_sample_size_ok(n, theta, delta, t);
    const double lower = theta * t / (2.0 * n);
    const double upper = 2.0 * std::exp(1.0) * theta * t / n;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(derive_trial_seed(base_seed, 3, static_cast<std::uint64_t>(s)));
        const MeasurementSet m = sample_sparse_rows(n, t, theta, rng);
        const GramSummary gram = gram_summary(m);
        if (gram.lambda_min >= lower && gram.lambda_max <= upper) ++report.spectrum_passes;
        ++report.norm_passes; // no norm clause in this model
    }
    return report;
}

/// Empirical check of the Erdos-Renyi layer bounds: lambda_{n-1}(O_T^T O_T)
/// inside [n p_sum / 2, 3 n p_sum / 2] and ||C||_2 <= gamma_{n,T}.
inline SamplingVerifyReport verify_prop5(int n, int t, double p, double delta, int seeds,
                                         std::uint64_t base_seed) {
    SamplingVerifyReport report;
    report.seeds = seeds;
    const double p_sum = p * t;
    report.hypothesis_ok = p_sum >= std::log(n / delta) / n;
    const double lower = n * p_sum / 2.0;
    const double upper = 3.0 * n * p_sum / 2.0;
    const double gamma = gamma_n_t(n, t, p, delta);
    for (int s = 0; s < seeds; ++s) {
        Rng rng(derive_trial_seed(base_seed, 4, static_cast<std::uint64_t>(s)));
        const ErLayers er = sample_er_layers(n, std::vector<double>(t, p), rng);
        const GramSummary gram = gram_summary(er.measurements);
        if (gram.lambda_second_min >= lower && gram.lambda_second_min <= upper)
            ++report.spectrum_passes;
        if (gram.design_norm <= gamma) ++report.norm_passes;
    }
    return report;
}

} // namespace graphsmooth
