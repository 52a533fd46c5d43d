#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphsmooth/graph.hpp"
#include "graphsmooth/measurement.hpp"

namespace graphsmooth {

/// The spectral quantities feeding the closed-form lower bound:
///   b1 <= lambda_{T-1}(L)                      (Fiedler lower bound)
///   b2 <= lambda_min(O_T^T O_T) / T            (lambda_{n-1} in sync mode)
///   b3 >= 2 ||C||_2 sqrt(lambda_max(O_T^T O_T) / T)
/// lambda_min_CtC is lambda_min(C^T C), or min_t lambda_{n-1}(C_t^T C_t) in
/// sync mode. b2 < b3 always holds for the exact quantities and is enforced
/// here for user-supplied bounds.
struct BoundInputs {
    double mu;
    double b1;
    double b2;
    double b3;
    double lambda_min_CtC;

    BoundInputs(double mu_, double b1_, double b2_, double b3_, double lambda_min_CtC_)
        : mu(mu_), b1(b1_), b2(b2_), b3(b3_), lambda_min_CtC(lambda_min_CtC_) {
        if (!(mu >= 0.0)) throw std::invalid_argument("BoundInputs: mu must be >= 0");
        if (!(b1 > 0.0 && b2 > 0.0 && b3 > 0.0))
            throw std::invalid_argument("BoundInputs: b1, b2, b3 must be > 0");
        if (!(b2 < b3)) throw std::invalid_argument("BoundInputs: b2 < b3 required");
        if (!(lambda_min_CtC >= 0.0))
            throw std::invalid_argument("BoundInputs: lambda_min_CtC must be >= 0");
    }
};

enum class MuRegime { small_mu, large_mu };

inline const char* to_string(MuRegime r) {
    return r == MuRegime::small_mu ? "small_mu" : "large_mu";
}

struct LambdaBarPrime {
    double value = 0.0;
    MuRegime regime = MuRegime::small_mu;
};

namespace detail {

inline double lambda_bar_prime_small(double mu_b1, double b2, double b3) {
    return b2 * b2 / (2.0 * (b2 * b2 + b3 * b3)) * mu_b1;
}

inline double lambda_bar_prime_large(double mu_b1, double b2, double b3) {
    const double d = mu_b1 - b2;
    const double root = std::sqrt(b3 * b3 + d * d);
    return 0.25 * (1.0 - d / root) * mu_b1 + 0.25 * b2 +
           (b2 * d - b3 * b3) / (4.0 * root);
}

inline double regime_threshold(double b2, double b3) {
    return b2 + (b3 * b3 - b2 * b2) / (2.0 * b2);
}

} // namespace detail

/// Closed-form lower bound on the smallest relevant eigenvalue of
/// mu M^T M + C^T C. Two regimes split at mu b1 = b2 + (b3^2 - b2^2)/(2 b2);
/// the threshold itself takes the large-mu branch (where the stationary
/// point alpha_1 is the minimizer). The branches agree at the threshold.
inline LambdaBarPrime lambda_bar_prime(const BoundInputs& in) {
    if (!(in.mu > 0.0)) throw std::invalid_argument("lambda_bar_prime: mu must be > 0");
    const double mu_b1 = in.mu * in.b1;
    if (mu_b1 < detail::regime_threshold(in.b2, in.b3))
        return {detail::lambda_bar_prime_small(mu_b1, in.b2, in.b3), MuRegime::small_mu};
    return {detail::lambda_bar_prime_large(mu_b1, in.b2, in.b3), MuRegime::large_mu};
}

/// lambda_bar(mu) = max{lambda_bar'(mu), lambda_min(C^T C)}.
inline double lambda_bar(const BoundInputs& in) {
    return std::max(lambda_bar_prime(in).value, in.lambda_min_CtC);
}

/// Reads the exact b-quantities off a concrete instance. sync switches the
/// relevant Gram eigenvalue to lambda_{n-1} and the per-block floor to
/// min_t lambda_{n-1}(C_t^T C_t).
inline BoundInputs bound_inputs_from(const Graph& g, const MeasurementSet& m,
                                     const GramSummary& gram, double mu, bool sync) {
    if (!g.is_connected()) throw std::invalid_argument("bound_inputs_from: graph disconnected");
    if (sync && m.n() < 2)
        throw std::invalid_argument("bound_inputs_from: sync mode needs n >= 2");
    const double relevant = sync ? gram.lambda_second_min : gram.lambda_min;
    if (relevant <= 1e-10 * std::max(gram.lambda_max, 0.0))
        throw std::invalid_argument(
            "bound_inputs_from: relevant Gram eigenvalue is numerically zero");

    const double t = static_cast<double>(g.vertex_count());
    const double b1 = fiedler_value(g);
    const double b2 = relevant / t;
    const double b3 = 2.0 * gram.design_norm * std::sqrt(gram.lambda_max / t);

    double lambda_min_ctc = std::numeric_limits<double>::infinity();
    for (int node = 0; node < m.node_count(); ++node) {
        Matrix block_gram(m.n(), m.n());
        for (const auto& row : m.block(node).rows)
            for (auto [ci, vi] : row.entries)
                for (auto [cj, vj] : row.entries) block_gram(ci, cj) += vi * vj;
        const auto eig = symmetric_eigen(block_gram, false).eigenvalues;
        const double lam = sync ? eig[m.n() - 2] : eig.back();
        lambda_min_ctc = std::min(lambda_min_ctc, std::max(lam, 0.0));
    }
    return BoundInputs(mu, b1, b2, b3, lambda_min_ctc);
}

enum class VarianceForm { envelope, tight };

struct BoundReport {
    double lambda_bar_prime = 0.0;
    double lambda_bar = 0.0;
    MuRegime regime = MuRegime::small_mu;
    double bias_bound = 0.0;
    double variance_bound = 0.0;
    double total_bound = 0.0;
    double delta = 0.0;
};

/// Theoretical high-probability bound on ||xhat - x||^2:
///   bias      4 mu S_T / lambda_bar(mu)
///   variance  40 n sigma^2 ||C||_2^2 (sum_{t<T} (lambda_bar + mu lambda_t)^{-2}
///             + lambda_bar^{-2}) log(1/delta)
/// The tight form replaces the 40 log(1/delta) envelope with
/// 8 (1 + 4 log(1/delta)).
inline BoundReport error_bound(const BoundInputs& in, const LaplacianSpectrum& spectrum,
                               int n, double sigma, double design_norm, double s_t,
                               double delta, VarianceForm form = VarianceForm::envelope) {
    if (!(delta > 0.0 && delta <= std::exp(-1.0)))
        throw std::invalid_argument("error_bound: delta must lie in (0, e^-1]");
    if (!(in.mu > 0.0)) throw std::invalid_argument("error_bound: mu must be > 0");

    const auto lbp = lambda_bar_prime(in);
    BoundReport report;
    report.lambda_bar_prime = lbp.value;
    report.regime = lbp.regime;
    report.lambda_bar = std::max(lbp.value, in.lambda_min_CtC);
    report.delta = delta;

    report.bias_bound = 4.0 * in.mu * s_t / report.lambda_bar;

    const int t_count = static_cast<int>(spectrum.eigenvalues.size());
    double sum = 1.0 / (report.lambda_bar * report.lambda_bar);
    for (int t = 0; t + 1 < t_count; ++t) {
        const double denom = report.lambda_bar + in.mu * spectrum.eigenvalues[t];
        sum += 1.0 / (denom * denom);
    }
    const double noise_scale = n * sigma * sigma * design_norm * design_norm;
    const double log_term = std::log(1.0 / delta);
    report.variance_bound = form == VarianceForm::envelope
                                ? 40.0 * noise_scale * sum * log_term
                                : 8.0 * noise_scale * sum * (1.0 + 4.0 * log_term);
    report.total_bound = report.bias_bound + report.variance_bound;
    return report;
}

namespace detail {
inline void require_mu_star_inputs(double lmin, double lmax, int n, double sigma,
                                   double design_norm, double s_t, int t, double c) {
    if (!(lmin > 0.0)) throw std::invalid_argument("mu_star: lambda_min bound must be > 0");
    if (!(lmax >= lmin)) throw std::invalid_argument("mu_star: lambda_max bound below lambda_min");
    if (n < 1 || t < 1) throw std::invalid_argument("mu_star: n and T must be >= 1");
    if (!(sigma >= 0.0) || !(design_norm >= 0.0))
        throw std::invalid_argument("mu_star: sigma and design norm must be >= 0");
    if (!(s_t > 0.0)) throw std::invalid_argument("mu_star: S_T must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("mu_star: constant must be > 0");
}
} // namespace detail

/// Penalty choice for the complete graph.
inline double mu_star_complete(double lmin, double lmax, int n, double sigma,
                               double design_norm, double s_t, int t, double c1) {
    detail::require_mu_star_inputs(lmin, lmax, n, sigma, design_norm, s_t, t, c1);
    const double td = static_cast<double>(t);
    const double first =
        std::cbrt(2.0 * n * sigma * sigma * design_norm * design_norm) *
            std::cbrt(lmin / s_t) / std::cbrt(td * td) -
        lmin / (td * td);
    const double second =
        (c1 / td) * (lmin / td + design_norm * design_norm * lmax / lmin);
    return std::max(first, second);
}

/// Penalty choice for the star graph.
inline double mu_star_star_graph(double lmin, double lmax, int n, double sigma,
                                 double design_norm, double s_t, int t, double c1) {
    detail::require_mu_star_inputs(lmin, lmax, n, sigma, design_norm, s_t, t, c1);
    const double td = static_cast<double>(t);
    const double first = std::cbrt(2.0 * n * sigma * sigma * design_norm * design_norm) *
                             std::cbrt(lmin) / std::cbrt(s_t) -
                         lmin / td;
    const double second = c1 * (lmin / td + design_norm * design_norm * lmax / lmin);
    return std::max(first, second);
}

/// Penalty choice under the sparse random measurement model, where the Gram
/// bounds theta T / (2n) and 2 e theta T / n are wired in.
inline double mu_star_rand_samp(double theta, int t, int n, double sigma, double s_t,
                                double c1, GraphKind graph_kind) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("mu_star_rand_samp: theta must lie in (0,1]");
    if (!(s_t > 0.0)) throw std::invalid_argument("mu_star_rand_samp: S_T must be > 0");
    if (n < 1 || t < 1) throw std::invalid_argument("mu_star_rand_samp: n and T must be >= 1");
    if (!(c1 > 0.0)) throw std::invalid_argument("mu_star_rand_samp: c1 must be > 0");
    const double td = static_cast<double>(t);
    const double sigma23 = std::cbrt(sigma * sigma);
    switch (graph_kind) {
        case GraphKind::complete:
            return std::max(sigma23 * std::cbrt(theta / (td * s_t)) - theta / (td * n),
                            c1 / td);
        case GraphKind::star:
            return std::max(
                sigma23 * std::cbrt(theta) * std::cbrt(td) / std::cbrt(s_t * s_t) -
                    theta / n,
                c1);
        default:
            throw std::invalid_argument("mu_star_rand_samp: complete or star graph only");
    }
}

/// High-probability bound gamma_{n,T} on ||C||_2 for Erdos-Renyi layers.
inline double gamma_n_t(int n, int t, double p_max, double delta = 0.05) {
    if (n < 1 || t < 1) throw std::invalid_argument("gamma_n_t: n and T must be >= 1");
    if (!(p_max >= 0.0 && p_max <= 1.0))
        throw std::invalid_argument("gamma_n_t: p_max must lie in [0,1]");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("gamma_n_t: delta must lie in (0,1)");
    const double hoeffding = std::sqrt(2.0 * n * p_max) +
                             std::pow(2.0 * n * std::log(n * t / delta), 0.25);
    return std::min(hoeffding, std::sqrt(2.0 * n));
}

/// Penalty choice for the multi-layer synchronization setting with
/// Erdos-Renyi measurement graphs.
inline double mu_star_sync(double p_sum, double gamma, int n, double sigma, double s_t,
                           int t, double c2, GraphKind graph_kind) {
    if (!(p_sum > 0.0)) throw std::invalid_argument("mu_star_sync: p_sum must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("mu_star_sync: gamma must be > 0");
    if (!(s_t > 0.0)) throw std::invalid_argument("mu_star_sync: S_T must be > 0");
    if (n < 1 || t < 1) throw std::invalid_argument("mu_star_sync: n and T must be >= 1");
    if (!(c2 > 0.0)) throw std::invalid_argument("mu_star_sync: c2 must be > 0");
    const double td = static_cast<double>(t);
    const double scale = std::cbrt(static_cast<double>(n) * n) * std::cbrt(sigma * sigma) *
                         std::cbrt(gamma * gamma);
    const double second = (c2 / td) * (n * p_sum / td + gamma * gamma);
    switch (graph_kind) {
        case GraphKind::complete:
            return std::max(scale * std::cbrt(p_sum / (td * td * s_t)) - n * p_sum / (td * td),
                            second);
        case GraphKind::star:
            return std::max(scale * std::cbrt(p_sum / s_t) - n * p_sum / td, second);
        default:
            throw std::invalid_argument("mu_star_sync: complete or star graph only");
    }
}

/// Advisory sample-size hypothesis of the sparse random measurement model.
inline bool rand_samp_sample_size_ok(int n, double theta, double delta, int t) {
    return t >= (8.0 * n / theta) * std::log(n / delta);
}

} // namespace graphsmooth
