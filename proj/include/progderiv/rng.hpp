#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

namespace progderiv {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used for combining seeds, not as a stream generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-sensitive seed combinator: mix_seed(a,b) != mix_seed(b,a) in general.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

// Per-cell seed derived from the global seed and the cell's center position.
// Position-based (not index-based) so that a scan over a sub-range whose cell
// centers coincide with a larger scan reproduces the same per-cell streams.
inline std::uint64_t cell_seed(std::uint64_t global_seed, double center_x, double center_y) {
    const auto bx = std::bit_cast<std::uint64_t>(center_x);
    const auto by = std::bit_cast<std::uint64_t>(center_y);
    return mix_seed(mix_seed(global_seed, bx), by);
}

// The standard distributions are implementation-defined, so we roll our own
// on top of the (bit-exact, standardized) mt19937_64 stream.

// Uniform in [0, 1), 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
    return lo + uniform_unit(rng) * (hi - lo);
}

// Standard normal via Marsaglia's polar method. The spare deviate is
// discarded to keep the consumption pattern simple.
inline double gaussian(Rng& rng) {
    for (;;) {
        const double u = 2.0 * uniform_unit(rng) - 1.0;
        const double v = 2.0 * uniform_unit(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace progderiv
