// rng.hpp — Seedable, splittable random streams and a portable Gaussian sampler

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace oqsid::rng {

// splitmix64 mixing step; used to decorrelate (seed, instance) pairs
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for Monte-Carlo instance `instance` under master `seed`
inline std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t instance) {
    std::uint64_t s = seed ^ (0x2545f4914f6cdd1dULL * (instance + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

// Deterministic 64-bit sub-seed for (seed, instance); feeds nested derivations
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t instance) {
    std::uint64_t s = seed ^ (0x2545f4914f6cdd1dULL * (instance + 1));
    return splitmix64(s);
}

// Uniform double in [0,1); fixed 53-bit construction for cross-platform determinism
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

// Box–Muller standard normal (own implementation: std::normal_distribution is
// not bit-reproducible across standard libraries)
class Gaussian {
public:
    double operator()(std::mt19937_64& gen) {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform01(gen);
        double u2 = uniform01(gen);
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

private:
    bool have_spare_{false};
    double spare_{0.0};
};

} // namespace oqsid::rng
