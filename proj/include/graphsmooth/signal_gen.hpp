#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "graphsmooth/rng.hpp"
#include "graphsmooth/stacked_signal.hpp"

namespace graphsmooth {

enum class SmoothnessLaw { star_recipe, complete_recipe, custom };

/// Target quadratic-variation budget together with the generating law.
struct SmoothnessBudget {
    double s_t = 0.0;
    SmoothnessLaw law = SmoothnessLaw::custom;
};

/// Smooth ground truth for a star graph with hub at node 0. The hub draws
/// x_1 ~ N(0, I/n); satellites split into a smooth band x_t ~ N(x_1, a^2/n I)
/// with a = sqrt(S_T/T) and a far band of m = min{floor(S_T), T} nodes at
/// N(x_1 + ones/sqrt(n), I/n). The quadratic variation meets S_T in
/// expectation, up to the recipe's constant.
inline StackedSignal gen_smooth_star(int n, int node_count, double s_t, Rng& rng) {
    if (n < 1 || node_count < 2)
        throw std::invalid_argument("gen_smooth_star: need n >= 1, T >= 2");
    if (!(s_t >= 0.0)) throw std::invalid_argument("gen_smooth_star: S_T must be >= 0");

    const double alpha = std::sqrt(s_t / node_count);
    const int m = static_cast<int>(std::min(std::floor(s_t), static_cast<double>(node_count)));
    const double hub_sd = 1.0 / std::sqrt(static_cast<double>(n));
    const double shift = 1.0 / std::sqrt(static_cast<double>(n));
    const double smooth_sd = alpha / std::sqrt(static_cast<double>(n));

    StackedSignal x(n, node_count);
    double* hub = x.block(0);
    for (int i = 0; i < n; ++i) hub[i] = rng.normal(0.0, hub_sd);
    for (int t = 1; t < node_count; ++t) {
        double* b = x.block(t);
        const bool far_band = t + 1 > node_count - m; // 1-based t in (T-m, T]
        for (int i = 0; i < n; ++i)
            b[i] = far_band ? rng.normal(hub[i] + shift, hub_sd)
                            : rng.normal(hub[i], smooth_sd);
    }
    return x;
}

/// Smooth ground truth for a complete graph: the first floor(T/2) nodes draw
/// N(0, S_T/(T^2 n) I), the rest N(z, S_T/(T^2 n) I) with
/// z = sqrt(S_T)/(T sqrt(n)) ones.
inline StackedSignal gen_smooth_complete(int n, int node_count, double s_t, Rng& rng) {
    if (n < 1 || node_count < 2)
        throw std::invalid_argument("gen_smooth_complete: need n >= 1, T >= 2");
    if (!(s_t >= 0.0)) throw std::invalid_argument("gen_smooth_complete: S_T must be >= 0");

    const double sd = std::sqrt(s_t / (static_cast<double>(node_count) * node_count * n));
    const double z = std::sqrt(s_t) / (node_count * std::sqrt(static_cast<double>(n)));
    const int half = node_count / 2;

    StackedSignal x(n, node_count);
    for (int t = 0; t < node_count; ++t) {
        double* b = x.block(t);
        const double mean = t < half ? 0.0 : z;
        for (int i = 0; i < n; ++i) b[i] = rng.normal(mean, sd);
    }
    return x;
}

/// Dispatches on the budget's law. Custom budgets have no generator here;
/// callers supply their own signals.
inline StackedSignal gen_smooth(int n, int node_count, const SmoothnessBudget& budget,
                                Rng& rng) {
    switch (budget.law) {
        case SmoothnessLaw::star_recipe:
            return gen_smooth_star(n, node_count, budget.s_t, rng);
        case SmoothnessLaw::complete_recipe:
            return gen_smooth_complete(n, node_count, budget.s_t, rng);
        default:
            throw std::invalid_argument("gen_smooth: custom budgets need a caller-side generator");
    }
}

/// i.i.d. N(0, sigma^2) noise via Box-Muller on the seeded stream.
inline std::vector<double> gen_noise(int length, double sigma, Rng& rng) {
    if (length < 0) throw std::invalid_argument("gen_noise: negative length");
    if (!(sigma >= 0.0)) throw std::invalid_argument("gen_noise: sigma must be >= 0");
    std::vector<double> eta(length);
    for (double& e : eta) e = sigma * rng.normal();
    return eta;
}

} // namespace graphsmooth
