#pragma once

/// Small self-contained RNG helpers.
///
/// Standard-library distributions are allowed to differ between
/// implementations, which would break byte-identical rebuilds if the build
/// ever moves between toolchains. Everything random in this project flows
/// through these fixed-algorithm helpers instead.

#include <cmath>
#include <cstdint>

namespace fusegraph {

/// splitmix64: tiny, well-mixed 64-bit generator. Also used to derive
/// per-stream seeds so that (seed, stream) pairs give independent sequences.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// Derives the seed for an independent stream (e.g. one per node).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    SplitMix64 mixer(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
    return mixer.next();
}

/// Uniform draw from [0, bound) via the multiply-shift trick. Bias is on the
/// order of bound / 2^64 — irrelevant here.
inline uint64_t bounded(SplitMix64& rng, uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(rng.next()) * bound) >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(SplitMix64& rng) {
    return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box–Muller (fixed algorithm, platform-independent).
inline double gaussian(SplitMix64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

} // namespace fusegraph
