#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace grouphub {

using Rng = std::mt19937_64;

// Independent stream for a (seed, index...) tuple. Parallel workers derive
// their streams from their index so results never depend on scheduling.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
    std::uint64_t mixed = seed;
    for (auto p : path) {
        // splitmix64 step folds each path component into the seed
        mixed += 0x9E3779B97F4A7C15ULL + p;
        std::uint64_t z = mixed;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        mixed = z ^ (z >> 31);
    }
    std::seed_seq full{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32),
                       static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(path.size())};
    return Rng(full);
}

// Uniform on [0, 1) with 53 random bits. Avoids std::uniform_real_distribution
// so streams are identical across standard library implementations.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Exponential(1) draw; used for uniform-on-simplex sampling.
inline double exponential1(Rng& rng) {
    return -std::log1p(-uniform01(rng));
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace grouphub
