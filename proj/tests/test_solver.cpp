#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "graphsmooth/bounds.hpp"
#include "graphsmooth/signal_gen.hpp"
#include "graphsmooth/solver.hpp"
#include "graphsmooth/verify.hpp"

using namespace graphsmooth;
using Catch::Matchers::WithinAbs;

namespace {

StackedSignal random_signal(int n, int t, Rng& rng) {
    StackedSignal x(n, t);
    for (double& v : x.data) v = rng.normal();
    return x;
}

/// n=3 signal, every node observes one coordinate, all coordinates covered.
MeasurementSet cyclic_coordinate_rows(int n, int t) {
    std::vector<MeasurementBlock> blocks(t);
    for (int i = 0; i < t; ++i)
        blocks[i].rows.push_back(SparseRow{{{i % n, 1.0}}});
    return MeasurementSet(n, std::move(blocks));
}

double rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

} // namespace

TEST_CASE("exact recovery: zero noise and block-constant signal") {
    const Graph g = build_star(6);
    const MeasurementSet m = cyclic_coordinate_rows(3, 6);
    StackedSignal x(3, 6);
    for (int t = 0; t < 6; ++t)
        for (int i = 0; i < 3; ++i) x.at(t, i) = 0.7 * i - 1.2;
    const std::vector<double> y = design_apply(m, x);

    SolveOptions opts;
    opts.mu = 2.5;
    const SolveReport r = solve_penalized(g, m, y, opts);
    REQUIRE(r.converged);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        REQUIRE_THAT(r.estimate.data[i], WithinAbs(x.data[i], 1e-8));
}

TEST_CASE("zero observations give the zero solution") {
    const Graph g = build_complete(5);
    const MeasurementSet m = cyclic_coordinate_rows(2, 5);
    SolveOptions opts;
    opts.mu = 1.0;
    const SolveReport r = solve_penalized(g, m, std::vector<double>(m.total_rows(), 0.0), opts);
    REQUIRE(r.converged);
    for (double v : r.estimate.data) REQUIRE(v == 0.0);

    Rng rng(900);
    const MeasurementSet inc = detail::random_incidence_measurements(3, 5, rng);
    opts.mode = SolveMode::centered;
    const SolveReport rs = solve_sync(g, inc, std::vector<double>(inc.total_rows(), 0.0), opts);
    REQUIRE(rs.converged);
    for (double v : rs.estimate.data) REQUIRE(v == 0.0);
}

TEST_CASE("Jacobi preconditioner hook reaches the same solution") {
    Rng rng(914);
    const Graph g = build_star(7);
    const MeasurementSet m = detail::random_full_rank_measurements(3, 7, rng);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();

    SolveOptions plain_opts;
    plain_opts.mu = 1.1;
    const SolveReport plain = solve_penalized(g, m, y, plain_opts);
    SolveOptions pre_opts = plain_opts;
    pre_opts.jacobi_precond = true;
    const SolveReport preconditioned = solve_penalized(g, m, y, pre_opts);
    REQUIRE(preconditioned.converged);
    for (std::size_t i = 0; i < plain.estimate.data.size(); ++i)
        REQUIRE_THAT(preconditioned.estimate.data[i],
                     WithinAbs(plain.estimate.data[i], 1e-8));
}

TEST_CASE("plain solver matches the dense oracle") {
    Rng rng(901);
    for (int rep = 0; rep < 15; ++rep) {
        const Graph g = detail::random_test_graph(rng);
        const int n = 2 + rng.uniform_index(2);
        const MeasurementSet m =
            detail::random_full_rank_measurements(n, g.vertex_count(), rng);
        std::vector<double> y(m.total_rows());
        for (double& v : y) v = rng.normal();
        const double mu = std::pow(10.0, -2.0 + 4.0 * rng.uniform());

        SolveOptions opts;
        opts.mu = mu;
        const SolveReport r = solve_penalized(g, m, y, opts);
        REQUIRE(r.converged);
        REQUIRE(r.final_residual <=
                opts.rel_tol * norm2(design_apply_transpose(m, y).data) * (1.0 + 1e-12));
        const StackedSignal oracle = dense_oracle_solve(g, m, y, mu, SolveMode::plain);
        REQUIRE(rel_err(r.estimate.data, oracle.data) <= 1e-8);
    }
}

TEST_CASE("centered solver matches the dense pseudoinverse oracle") {
    Rng rng(902);
    for (int rep = 0; rep < 15; ++rep) {
        const Graph g = detail::random_test_graph(rng);
        const int n = 3 + rng.uniform_index(2);
        const MeasurementSet m =
            detail::random_incidence_measurements(n, g.vertex_count(), rng);
        std::vector<double> y(m.total_rows());
        for (double& v : y) v = rng.normal();
        const double mu = std::pow(10.0, -2.0 + 4.0 * rng.uniform());

        SolveOptions opts;
        opts.mu = mu;
        opts.mode = SolveMode::centered;
        const SolveReport r = solve_sync(g, m, y, opts);
        REQUIRE(r.converged);
        const StackedSignal oracle = dense_oracle_solve(g, m, y, mu, SolveMode::centered);
        REQUIRE(rel_err(r.estimate.data, oracle.data) <= 1e-8);

        // estimate lies in span(P): every block sums to ~0
        for (int t = 0; t < r.estimate.node_count; ++t) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.estimate.at(t, i);
            REQUIRE_THAT(s, WithinAbs(0.0, 1e-10));
        }
    }
}

TEST_CASE("sync exact recovery for layer-constant centered signals") {
    Rng rng(903);
    const Graph g = build_complete(4);
    const MeasurementSet m = detail::random_incidence_measurements(4, 4, rng);
    StackedSignal x(4, 4);
    const double base[4] = {1.0, -2.0, 0.5, 0.5};
    for (int t = 0; t < 4; ++t)
        for (int i = 0; i < 4; ++i) x.at(t, i) = base[i];
    center_blocks_inplace(x);
    const std::vector<double> y = design_apply(m, x);

    SolveOptions opts;
    opts.mu = 1.0;
    opts.mode = SolveMode::centered;
    const SolveReport r = solve_sync(g, m, y, opts);
    REQUIRE(r.converged);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        REQUIRE_THAT(r.estimate.data[i], WithinAbs(x.data[i], 1e-8));
}

TEST_CASE("sync estimate is invariant to global shifts of the ground truth") {
    Rng rng(904);
    const Graph g = build_star(5);
    const MeasurementSet m = detail::random_incidence_measurements(3, 5, rng);
    StackedSignal x = random_signal(3, 5, rng);
    StackedSignal shifted = x;
    for (int t = 0; t < 5; ++t)
        for (int i = 0; i < 3; ++i) shifted.at(t, i) += 42.0;

    SolveOptions opts;
    opts.mu = 0.7;
    opts.mode = SolveMode::centered;
    const SolveReport r1 = solve_sync(g, m, design_apply(m, x), opts);
    const SolveReport r2 = solve_sync(g, m, design_apply(m, shifted), opts);
    for (std::size_t i = 0; i < r1.estimate.data.size(); ++i)
        REQUIRE_THAT(r1.estimate.data[i], WithinAbs(r2.estimate.data[i], 1e-10));
}

TEST_CASE("sync estimate is invariant to incidence row orientation") {
    Rng rng(905);
    const Graph g = build_path(4);
    const MeasurementSet m = detail::random_incidence_measurements(3, 4, rng);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();

    // flip the sign of every odd row and of the matching observation
    std::vector<MeasurementBlock> flipped_blocks(m.blocks().begin(), m.blocks().end());
    std::vector<double> flipped_y = y;
    int row0 = 0;
    for (auto& block : flipped_blocks) {
        for (int r = 0; r < block.row_count(); ++r) {
            if ((row0 + r) % 2 == 1) {
                for (auto& [col, val] : block.rows[r].entries) val = -val;
                flipped_y[row0 + r] = -flipped_y[row0 + r];
            }
        }
        row0 += block.row_count();
    }
    const MeasurementSet flipped(m.n(), std::move(flipped_blocks));

    SolveOptions opts;
    opts.mu = 1.3;
    opts.mode = SolveMode::centered;
    const SolveReport r1 = solve_sync(g, m, y, opts);
    const SolveReport r2 = solve_sync(g, flipped, flipped_y, opts);
    for (std::size_t i = 0; i < r1.estimate.data.size(); ++i)
        REQUIRE_THAT(r1.estimate.data[i], WithinAbs(r2.estimate.data[i], 1e-12));
}

TEST_CASE("solution is independent of the CG starting point") {
    Rng rng(906);
    const Graph g = build_complete(6);
    const MeasurementSet m = detail::random_full_rank_measurements(3, 6, rng);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();

    SolveOptions opts;
    opts.mu = 0.8;
    const SolveReport from_zero = solve_penalized(g, m, y, opts);
    const StackedSignal start = random_signal(3, 6, rng);
    const SolveReport from_random = solve_penalized(g, m, y, opts, &start);
    REQUIRE(from_zero.converged);
    REQUIRE(from_random.converged);
    for (std::size_t i = 0; i < from_zero.estimate.data.size(); ++i)
        REQUIRE_THAT(from_zero.estimate.data[i],
                     WithinAbs(from_random.estimate.data[i], 1e-8));
}

TEST_CASE("rank-deficient systems are rejected up front") {
    Rng rng(907);
    const Graph g = build_star(4);
    // incidence measurements leave ones in the null space -> plain mode singular
    const MeasurementSet incidence = detail::random_incidence_measurements(3, 4, rng);
    SolveOptions opts;
    opts.mu = 1.0;
    REQUIRE_THROWS_AS(
        solve_penalized(g, incidence, std::vector<double>(incidence.total_rows(), 1.0), opts),
        singular_system_error);

    // all-empty layers: lambda_{n-1} = 0 -> centered mode under-determined
    std::vector<MeasurementBlock> empty_blocks(4);
    const MeasurementSet empty(3, std::move(empty_blocks));
    opts.mode = SolveMode::centered;
    REQUIRE_THROWS_AS(solve_sync(g, empty, {}, opts), singular_system_error);
}

TEST_CASE("non-convergence is a reported state, not an exception") {
    Rng rng(908);
    const Graph g = build_complete(8);
    const MeasurementSet m = detail::random_full_rank_measurements(3, 8, rng);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();

    SolveOptions opts;
    opts.mu = 1.0;
    opts.max_iters = 1;
    const SolveReport r = solve_penalized(g, m, y, opts);
    REQUIRE_FALSE(r.converged);
    REQUIRE(r.iterations == 1);
}

TEST_CASE("CG error decreases monotonically in the A-norm") {
    Rng rng(909);
    const Graph g = build_star(5);
    const MeasurementSet m = detail::random_full_rank_measurements(2, 5, rng);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();
    const double mu = 0.9;
    const StackedSignal exact = dense_oracle_solve(g, m, y, mu, SolveMode::plain);
    const Matrix a = penalized_matrix_dense(g, m, mu);

    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 25; ++k) {
        SolveOptions opts;
        opts.mu = mu;
        opts.max_iters = k;
        const SolveReport r = solve_penalized(g, m, y, opts);
        std::vector<double> e(exact.data.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = r.estimate.data[i] - exact.data[i];
        const double a_norm_sq = dot(e, a * e);
        REQUIRE(a_norm_sq <= prev * (1.0 + 1e-9) + 1e-15);
        prev = a_norm_sq;
        if (r.converged) break;
    }
}

TEST_CASE("bias variance split: degenerate terms vanish") {
    Rng rng(910);
    const Graph g = build_complete(5);
    const MeasurementSet m = detail::random_full_rank_measurements(3, 5, rng);
    SolveOptions opts;
    opts.mu = 1.4;

    SECTION("zero noise kills E2") {
        const StackedSignal x = random_signal(3, 5, rng);
        const BiasVarianceSplit s =
            bias_variance_split(g, m, x, std::vector<double>(m.total_rows(), 0.0), opts);
        REQUIRE(s.e2 == 0.0);
        REQUIRE(s.e1 >= 0.0);
    }
    SECTION("block-constant x kills E1") {
        StackedSignal x(3, 5);
        for (int t = 0; t < 5; ++t)
            for (int i = 0; i < 3; ++i) x.at(t, i) = 3.0 - i;
        std::vector<double> eta(m.total_rows());
        for (double& v : eta) v = rng.normal();
        const BiasVarianceSplit s = bias_variance_split(g, m, x, eta, opts);
        REQUIRE(s.e1 == 0.0);
        REQUIRE(s.e2 > 0.0);
    }
}

TEST_CASE("bias term obeys the Lemma-2 bound and the split covers the error") {
    Rng rng(911);
    for (int rep = 0; rep < 20; ++rep) {
        const Graph g = detail::random_test_graph(rng);
        const int n = 2 + rng.uniform_index(2);
        const MeasurementSet m =
            detail::random_full_rank_measurements(n, g.vertex_count(), rng);
        const StackedSignal x = random_signal(n, g.vertex_count(), rng);
        std::vector<double> eta(m.total_rows());
        for (double& v : eta) v = rng.normal();

        SolveOptions opts;
        opts.mu = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
        const BiasVarianceSplit s = bias_variance_split(g, m, x, eta, opts);

        const GramSummary gram = gram_summary(m);
        const BoundInputs in = bound_inputs_from(g, m, gram, opts.mu, false);
        const double lb = lambda_bar(in);
        REQUIRE(s.e1 <= 4.0 * opts.mu * quadratic_variation(g, x) / lb + 1e-8);

        // solve the same instance and verify the decomposition covers it
        std::vector<double> y = design_apply(m, x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += eta[i];
        const SolveReport r = solve_penalized(g, m, y, opts);
        double err_sq = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double d = r.estimate.data[i] - x.data[i];
            err_sq += d * d;
        }
        REQUIRE(err_sq <= s.e1 + s.e2 + 1e-8);
    }
}

TEST_CASE("dense oracle: identity design sanity") {
    // every C_t = I_n, mu -> 0: the system approaches the identity
    const int n = 2, t = 4;
    std::vector<MeasurementBlock> blocks(t);
    for (auto& block : blocks)
        for (int i = 0; i < n; ++i) block.rows.push_back(SparseRow{{{i, 1.0}}});
    const MeasurementSet m(n, std::move(blocks));
    const Graph g = build_path(t);
    Rng rng(912);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();

    const StackedSignal x = dense_oracle_solve(g, m, y, 1e-8, SolveMode::plain);
    for (std::size_t i = 0; i < y.size(); ++i) REQUIRE_THAT(x.data[i], WithinAbs(y[i], 1e-6));
}

TEST_CASE("dense oracle centered output is block-centered exactly") {
    Rng rng(913);
    const Graph g = build_complete(4);
    const MeasurementSet m = detail::random_incidence_measurements(4, 4, rng);
    std::vector<double> y(m.total_rows());
    for (double& v : y) v = rng.normal();
    const StackedSignal x = dense_oracle_solve(g, m, y, 0.5, SolveMode::centered);
    for (int t = 0; t < 4; ++t) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += x.at(t, i);
        REQUIRE_THAT(s, WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("dense oracle enforces the size limit") {
    const Graph g = build_path(40);
    const MeasurementSet m = cyclic_coordinate_rows(30, 40); // nT = 1200
    REQUIRE_THROWS_AS(
        dense_oracle_solve(g, m, std::vector<double>(m.total_rows(), 0.0), 1.0,
                           SolveMode::plain),
        std::invalid_argument);
}

TEST_CASE("solve options are validated") {
    const Graph g = build_path(3);
    const MeasurementSet m = cyclic_coordinate_rows(2, 3);
    SolveOptions opts;
    opts.mu = 0.0;
    REQUIRE_THROWS_AS(solve_penalized(g, m, std::vector<double>(3, 0.0), opts),
                      std::invalid_argument);
    opts.mu = 1.0;
    opts.rel_tol = 2.0;
    REQUIRE_THROWS_AS(solve_penalized(g, m, std::vector<double>(3, 0.0), opts),
                      std::invalid_argument);
    opts.rel_tol = 1e-10;
    REQUIRE_THROWS_AS(solve_penalized(g, m, std::vector<double>(2, 0.0), opts),
                      std::invalid_argument);
}
