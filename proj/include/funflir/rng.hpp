#pragma once

// Seeded random streams. Every stochastic routine takes an explicit 64-bit
// seed; child streams are derived by mixing (seed, index...) with splitmix64
// so that replications are independent of evaluation order.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace funflir {

using Rng = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for the stream identified by `path` below `base`.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(base);
    for (auto p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace funflir
