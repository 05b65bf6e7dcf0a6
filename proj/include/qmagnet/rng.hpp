#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qmagnet {

// splitmix64: tiny, fully specified, byte-stable across platforms. Used for
// everything random in the artifact so seeded runs reproduce bit-identically.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (one value per call, spare discarded)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::uint64_t state_;
};

// Distinct, reproducible stream per (seed, run_index). Two mixing rounds keep
// streams with adjacent indices statistically independent.
inline std::uint64_t seed_stream(std::uint64_t seed, std::uint64_t run_index) {
    std::uint64_t z = seed + (run_index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    z = (z + 0xD1B54A32D192ED03ULL) * 0xAEF17502108EF2D9ULL;
    return z ^ (z >> 28);
}

// Knuth multiplication method; exact for the photon-count means used here
// (exp(-mean) stays comfortably above double underflow for mean <= 600).
inline int poisson_sample(SplitMix64& rng, double mean) {
    if (mean < 0.0 || !(mean <= 600.0))
        throw std::invalid_argument("poisson_sample: mean must be in [0, 600]");
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > limit);
    return k - 1;
}

}  // namespace qmagnet
