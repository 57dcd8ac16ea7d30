#pragma once

#include <cstdint>
#include <random>

namespace uarl::rnd {

// Hand-rolled draws: std::uniform_*_distribution output differs across
// standard libraries, and runs must replay identically from a seed.

/// [0, 1) with 53-bit resolution.
inline double uniform01(std::mt19937_64& g) {
    return double(g() >> 11) * (1.0 / 9007199254740992.0);
}

/// Uniform index in [0, n) via rejection sampling.
inline size_t uniform_index(std::mt19937_64& g, size_t n) {
    if (n <= 1) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
        r = g();
    } while (r >= limit);
    return size_t(r % n);
}

}  // namespace uarl::rnd
