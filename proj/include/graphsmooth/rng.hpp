#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace graphsmooth {

/// Stateless splitmix64 finalizer. Used both to expand seeds into stream
/// state and as the documented integer recipe for deriving per-trial seeds.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives the seed of the (T, trial_index) Monte-Carlo cell from the
/// experiment base seed. The recipe is two chained splitmix64 rounds with
/// distinct xor constants, so any cell is re-runnable in isolation and the
/// schedule is identical in any language that reproduces these 64-bit ops.
inline std::uint64_t derive_trial_seed(std::uint64_t base_seed,
                                       std::uint64_t node_count,
                                       std::uint64_t trial_index) {
    std::uint64_t s = splitmix64_mix(base_seed ^ 0x8BADF00D5EEDC0DEULL ^ node_count);
    return splitmix64_mix(s ^ 0xA0761D6478BD642FULL ^ trial_index);
}

/// xoshiro256++ stream seeded via splitmix64. Owns all randomness used by
/// samplers and generators; parallel callers hold disjoint streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = splitmix64_mix(s);
            word = s;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n). n must be >= 1.
    int uniform_index(int n) {
        int i = static_cast<int>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller on the uniform stream. The pairing is
    /// part of the stream contract: draws consume uniforms two at a time and
    /// the cosine value is handed out before the sine value.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace graphsmooth
