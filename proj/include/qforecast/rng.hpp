#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace qforecast {

// FNV-1a over bytes; used for stable string seeds and artifact checksums.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= 0x100000001b3ULL;
    }
    return state;
}

// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not. The helpers below replace them so that identical
// seeds give identical streams on every platform.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 bits of entropy.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Unbiased uniform integer in [0, bound) via rejection sampling.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % bound;
}

// Standard normal via Box-Muller.
inline double normal01(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

// Mixes an arbitrary list of 64-bit ingredients into one seed (splitmix64
// finalizer per ingredient). Used to derive per-component seeds from the
// experiment seed so that e.g. fold 0's shuffle stream never overlaps
// fold 1's initialization stream.
inline std::uint64_t seed_mix(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

template <typename... Rest>
std::uint64_t seed_mix(std::uint64_t first, std::uint64_t second, Rest... rest) {
    return seed_mix(seed_mix(first) ^ (second + 0x9e3779b97f4a7c15ULL), rest...);
}

} // namespace qforecast
