#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "graphsmooth/dense.hpp"
#include "graphsmooth/graph.hpp"
#include "graphsmooth/measurement.hpp"
#include "graphsmooth/stacked_signal.hpp"

namespace graphsmooth {

struct singular_system_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SolveMode { plain, centered };

struct SolveOptions {
    double mu = 1.0;
    double rel_tol = 1e-10;
    int max_iters = 0; // 0 -> 10 * nT
    SolveMode mode = SolveMode::plain;
    bool jacobi_precond = false; // reserved hook, off by default

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("SolveOptions: mu must be > 0");
        if (!(rel_tol > 0.0 && rel_tol < 1.0))
            throw std::invalid_argument("SolveOptions: rel_tol must lie in (0,1)");
        if (max_iters < 0) throw std::invalid_argument("SolveOptions: max_iters must be >= 0");
    }
};

struct SolveReport {
    StackedSignal estimate;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
};

namespace detail {

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
};

using VecOp = std::function<std::vector<double>(const std::vector<double>&)>;
using VecHook = std::function<void(std::vector<double>&)>;

/// Plain conjugate gradient on an SPD (or PSD-with-consistent-rhs) operator.
/// Convergence is declared at ||r|| <= rel_tol * ||rhs||. periodic_fix, when
/// set, is applied to the iterate every 50 iterations.
inline CgResult conjugate_gradient(const VecOp& apply, const std::vector<double>& rhs,
                                   double rel_tol, int max_iters,
                                   const std::vector<double>* start = nullptr,
                                   const VecHook& periodic_fix = nullptr,
                                   const std::vector<double>* precond_inv_diag = nullptr) {
    const std::size_t dim = rhs.size();
    CgResult result;
    result.x = start ? *start : std::vector<double>(dim, 0.0);

    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0 && !start) {
        result.converged = true;
        return result;
    }
    const double stop = rel_tol * std::max(rhs_norm, 1e-300);

    std::vector<double> r = apply(result.x);
    for (std::size_t i = 0; i < dim; ++i) r[i] = rhs[i] - r[i];

    auto precondition = [&](const std::vector<double>& v) {
        if (!precond_inv_diag) return v;
        std::vector<double> out(dim);
        for (std::size_t i = 0; i < dim; ++i) out[i] = v[i] * (*precond_inv_diag)[i];
        return out;
    };

    std::vector<double> z = precondition(r);
    std::vector<double> p = z;
    double rz = dot(r, z);
    double res = norm2(r);

    int iter = 0;
    while (res > stop && iter < max_iters) {
        std::vector<double> ap = apply(p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break; // operator not positive along p; stop cleanly
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < dim; ++i) {
            result.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ++iter;
        if (periodic_fix && iter % 50 == 0) periodic_fix(result.x);
        z = precondition(r);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        for (std::size_t i = 0; i < dim; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
        res = norm2(r);
    }

    result.iterations = iter;
    result.final_residual = res;
    result.converged = res <= stop;
    return result;
}

inline void check_dimensions(const Graph& g, const MeasurementSet& m,
                             const std::vector<double>& y) {
    if (m.node_count() != g.vertex_count())
        throw std::invalid_argument("solve: measurement node count does not match graph");
    if (static_cast<int>(y.size()) != m.total_rows())
        throw std::invalid_argument("solve: observation length does not match measurements");
}

inline int effective_max_iters(const SolveOptions& opts, int dim) {
    return opts.max_iters > 0 ? opts.max_iters : 10 * dim;
}

/// mu M^T M + C^T C applied matrix-free.
inline VecOp plain_operator(const Graph& g, const MeasurementSet& m, double mu) {
    const int n = m.n();
    const int t = m.node_count();
    return [&g, &m, mu, n, t](const std::vector<double>& v) {
        StackedSignal z(n, t, v);
        StackedSignal out = laplacian_apply(g, z);
        for (double& o : out.data) o *= mu;
        const StackedSignal ctc = design_apply_transpose(m, design_apply(m, z));
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += ctc.data[i];
        return std::move(out.data);
    };
}

/// P (mu M^T M + C^T C) P applied matrix-free.
inline VecOp centered_operator(const Graph& g, const MeasurementSet& m, double mu) {
    const int n = m.n();
    const int t = m.node_count();
    const VecOp inner = plain_operator(g, m, mu);
    return [inner, n, t](const std::vector<double>& v) {
        StackedSignal z(n, t, v);
        center_blocks_inplace(z);
        std::vector<double> w = inner(z.data);
        StackedSignal out(n, t, std::move(w));
        center_blocks_inplace(out);
        return std::move(out.data);
    };
}

/// Inverse diagonal of mu M^T M + C^T C, for the Jacobi hook.
inline std::vector<double> inverse_diagonal(const Graph& g, const MeasurementSet& m,
                                            double mu) {
    const int n = m.n();
    std::vector<double> diag(static_cast<std::size_t>(n) * m.node_count(), 0.0);
    const std::vector<int> deg = g.degrees();
    for (int t = 0; t < m.node_count(); ++t)
        for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(t) * n + i] = mu * deg[t];
    for (int t = 0; t < m.node_count(); ++t)
        for (const auto& row : m.block(t).rows)
            for (auto [col, val] : row.entries)
                diag[static_cast<std::size_t>(t) * n + col] += val * val;
    for (double& d : diag) d = d > 0.0 ? 1.0 / d : 1.0;
    return diag;
}

inline void check_rank_plain(const GramSummary& gram) {
    if (gram.lambda_min <= 1e-10 * std::max(gram.lambda_max, 0.0))
        throw singular_system_error(
            "solve_penalized: O_T^T O_T is rank deficient (lambda_min ~ 0)");
}

inline void check_rank_centered(const GramSummary& gram) {
    if (gram.lambda_second_min <= 1e-10 * std::max(gram.lambda_max, 0.0))
        throw singular_system_error(
            "solve_sync: system under-determined (lambda_{n-1}(O_T^T O_T) ~ 0)");
}

} // namespace detail

/// Solves (mu M^T M + C^T C) x = C^T y by matrix-free CG. Requires
/// lambda_min(O_T^T O_T) > 0; non-convergence is reported, not thrown.
inline SolveReport solve_penalized(const Graph& g, const MeasurementSet& m,
                                   const std::vector<double>& y, const SolveOptions& opts,
                                   const StackedSignal* start = nullptr) {
    opts.validate();
    detail::check_dimensions(g, m, y);
    detail::check_rank_plain(gram_summary(m));

    const StackedSignal rhs = design_apply_transpose(m, y);
    std::vector<double> inv_diag;
    if (opts.jacobi_precond) inv_diag = detail::inverse_diagonal(g, m, opts.mu);

    auto cg = detail::conjugate_gradient(
        detail::plain_operator(g, m, opts.mu), rhs.data, opts.rel_tol,
        detail::effective_max_iters(opts, static_cast<int>(rhs.data.size())),
        start ? &start->data : nullptr, nullptr,
        opts.jacobi_precond ? &inv_diag : nullptr);

    SolveReport report;
    report.estimate = StackedSignal(m.n(), m.node_count(), std::move(cg.x));
    report.iterations = cg.iterations;
    report.final_residual = cg.final_residual;
    report.converged = cg.converged;
    return report;
}

/// Solves the centered system P (mu M^T M + C^T C) P u = P C^T y by CG
/// started at 0. The Krylov space stays in span(P), so the limit is the
/// pseudoinverse solution; the iterate is re-centered every 50 iterations
/// and once at the end. Requires lambda_{n-1}(O_T^T O_T) > 0.
inline SolveReport solve_sync(const Graph& g, const MeasurementSet& m,
                              const std::vector<double>& y, const SolveOptions& opts,
                              const StackedSignal* start = nullptr) {
    opts.validate();
    if (opts.mode != SolveMode::centered)
        throw std::invalid_argument("solve_sync: options must select centered mode");
    if (m.n() < 2) throw std::invalid_argument("solve_sync: n must be >= 2");
    detail::check_dimensions(g, m, y);
    detail::check_rank_centered(gram_summary(m));

    const int n = m.n();
    const int t = m.node_count();
    StackedSignal rhs = design_apply_transpose(m, y);
    center_blocks_inplace(rhs);

    std::vector<double> start_vec;
    if (start) {
        StackedSignal s = *start;
        center_blocks_inplace(s);
        start_vec = std::move(s.data);
    }

    detail::VecHook recenter = [n, t](std::vector<double>& v) {
        StackedSignal s(n, t, std::move(v));
        center_blocks_inplace(s);
        v = std::move(s.data);
    };

    auto cg = detail::conjugate_gradient(
        detail::centered_operator(g, m, opts.mu), rhs.data, opts.rel_tol,
        detail::effective_max_iters(opts, static_cast<int>(rhs.data.size())),
        start ? &start_vec : nullptr, recenter);

    recenter(cg.x);
    SolveReport report;
    report.estimate = StackedSignal(n, t, std::move(cg.x));
    report.iterations = cg.iterations;
    report.final_residual = cg.final_residual;
    report.converged = cg.converged;
    return report;
}

/// Front door that dispatches on opts.mode.
inline SolveReport solve(const Graph& g, const MeasurementSet& m,
                         const std::vector<double>& y, const SolveOptions& opts) {
    return opts.mode == SolveMode::plain ? solve_penalized(g, m, y, opts)
                                         : solve_sync(g, m, y, opts);
}

struct BiasVarianceSplit {
    double e1 = 0.0; // 2 mu^2 ||A^-1 M^T M x||^2
    double e2 = 0.0; // 2 ||A^-1 C^T eta||^2
};

/// Measures the two terms of the squared-error decomposition
/// ||xhat - x||^2 <= E1 + E2 with one CG solve each, and cross-checks the
/// triangle inequality on the way out.
inline BiasVarianceSplit bias_variance_split(const Graph& g, const MeasurementSet& m,
                                             const StackedSignal& x_true,
                                             const std::vector<double>& eta,
                                             const SolveOptions& opts) {
    opts.validate();
    if (x_true.node_count != g.vertex_count() || x_true.block_size != m.n())
        throw std::invalid_argument("bias_variance_split: x dimensions mismatch");
    if (static_cast<int>(eta.size()) != m.total_rows())
        throw std::invalid_argument("bias_variance_split: eta length mismatch");

    const GramSummary gram = gram_summary(m);
    const bool centered = opts.mode == SolveMode::centered;
    if (centered)
        detail::check_rank_centered(gram);
    else
        detail::check_rank_plain(gram);

    const int n = m.n();
    const int t = m.node_count();
    const detail::VecOp op = centered ? detail::centered_operator(g, m, opts.mu)
                                      : detail::plain_operator(g, m, opts.mu);
    detail::VecHook recenter = nullptr;
    if (centered)
        recenter = [n, t](std::vector<double>& v) {
            StackedSignal s(n, t, std::move(v));
            center_blocks_inplace(s);
            v = std::move(s.data);
        };
    const int max_iters = detail::effective_max_iters(opts, n * t);

    StackedSignal rhs_bias = laplacian_apply(g, x_true);
    if (centered) center_blocks_inplace(rhs_bias);
    auto cg1 = detail::conjugate_gradient(op, rhs_bias.data, opts.rel_tol, max_iters,
                                          nullptr, recenter);

    StackedSignal rhs_var = design_apply_transpose(m, eta);
    if (centered) center_blocks_inplace(rhs_var);
    auto cg2 = detail::conjugate_gradient(op, rhs_var.data, opts.rel_tol, max_iters,
                                          nullptr, recenter);

    BiasVarianceSplit split;
    const double w1 = norm2(cg1.x);
    const double w2 = norm2(cg2.x);
    split.e1 = 2.0 * opts.mu * opts.mu * w1 * w1;
    split.e2 = 2.0 * w2 * w2;

    // xhat - x = -mu w1 + w2; 2a^2 + 2b^2 >= (a+b)^2 must hold up to CG noise.
    double err_sq = 0.0;
    for (std::size_t i = 0; i < cg1.x.size(); ++i) {
        const double d = -opts.mu * cg1.x[i] + cg2.x[i];
        err_sq += d * d;
    }
    if (err_sq > split.e1 + split.e2 + 1e-6 * (1.0 + split.e1 + split.e2))
        throw std::runtime_error("bias_variance_split: error decomposition violated");
    return split;
}

/// Dense mu (L (x) I_n) + C^T C, for oracles and spectral verification.
inline Matrix penalized_matrix_dense(const Graph& g, const MeasurementSet& m, double mu) {
    const int n = m.n();
    const int t = m.node_count();
    Matrix a(n * t, n * t);
    const Matrix l = laplacian_dense(g);
    for (int ti = 0; ti < t; ++ti)
        for (int tj = 0; tj < t; ++tj) {
            const double lij = l(ti, tj);
            if (lij == 0.0) continue;
            for (int i = 0; i < n; ++i) a(ti * n + i, tj * n + i) += mu * lij;
        }
    for (int ti = 0; ti < t; ++ti)
        for (const auto& row : m.block(ti).rows)
            for (auto [ci, vi] : row.entries)
                for (auto [cj, vj] : row.entries) a(ti * n + ci, ti * n + cj) += vi * vj;
    return a;
}

/// In-place P A P for P = I_T (x) (I_n - ones*ones^T/n): centers every
/// n-block of rows, then of columns.
inline void center_project_dense(Matrix& a, int n, int t) {
    const int dim = n * t;
    for (int col = 0; col < dim; ++col)
        for (int ti = 0; ti < t; ++ti) {
            double mean = 0.0;
            for (int i = 0; i < n; ++i) mean += a(ti * n + i, col);
            mean /= n;
            for (int i = 0; i < n; ++i) a(ti * n + i, col) -= mean;
        }
    for (int rowi = 0; rowi < dim; ++rowi)
        for (int ti = 0; ti < t; ++ti) {
            double mean = 0.0;
            for (int i = 0; i < n; ++i) mean += a(rowi, ti * n + i);
            mean /= n;
            for (int i = 0; i < n; ++i) a(rowi, ti * n + i) -= mean;
        }
}

/// Dense verification oracle for both solve modes. Materializes
/// mu (L (x) I_n) + C^T C; plain mode uses Gaussian elimination, centered
/// mode projects and pseudo-inverts with eigenvalue cutoff 1e-10 lambda_max.
inline StackedSignal dense_oracle_solve(const Graph& g, const MeasurementSet& m,
                                        const std::vector<double>& y, double mu,
                                        SolveMode mode) {
    detail::check_dimensions(g, m, y);
    const int n = m.n();
    const int t = m.node_count();
    if (n * t > 1024) throw std::invalid_argument("dense_oracle_solve: nT exceeds 1024");

    Matrix a = penalized_matrix_dense(g, m, mu);
    const StackedSignal rhs = design_apply_transpose(m, y);

    if (mode == SolveMode::plain)
        return StackedSignal(n, t, gauss_solve(std::move(a), rhs.data));

    center_project_dense(a, n, t);
    return StackedSignal(n, t, symmetric_pinv_apply(a, rhs.data, 1e-10));
}

} // namespace graphsmooth
