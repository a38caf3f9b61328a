#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tcspc {

namespace detail {

// splitmix64 finalizer: full-avalanche bijective mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    return mix64(state);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

// Counter-based random stream: xoshiro256++ keyed by (seed, counter).
// Streams for different counters are independent, so simulation cycles can
// be generated in parallel with results identical for any worker count.
// All samplers are hand-rolled inversion-style draws so the sequence is
// fully determined by the stream (no libstdc++ distribution state).
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t counter) {
        // Two finalizer rounds with the counter folded in between keep
        // streams for adjacent counters and related seeds independent.
        std::uint64_t key = detail::mix64(seed ^ 0xD1B54A32D192ED03ULL);
        key = detail::mix64(key + counter * 0x9E3779B97F4A7C15ULL);
        for (auto& w : s_) w = detail::splitmix64(key);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exponential with the given mean; uses 1-u so log(0) cannot occur.
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    // Box-Muller, one value per call (no cached pair).
    double normal(double mean, double sigma) {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Knuth product-of-uniforms below mean 10, Hormann's PTRS transformed
    // rejection above it (exp(-mean) underflows long before large means).
    std::uint32_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 10.0) {
            const double limit = std::exp(-mean);
            double p = uniform();
            std::uint32_t k = 0;
            while (p > limit) {
                p *= uniform();
                ++k;
            }
            return k;
        }
        const double b = 0.931 + 2.53 * std::sqrt(mean);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mean = std::log(mean);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint32_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                k * log_mean - mean - std::lgamma(k + 1.0))
                return static_cast<std::uint32_t>(k);
        }
    }

private:
    std::uint64_t s_[4];
};

}  // namespace tcspc
