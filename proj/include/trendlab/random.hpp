// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace trendlab {

/// Master seed. Every stochastic draw (init, dropout, shuffling, bootstrap)
/// is derived from one of these, so equal seeds give equal trajectories.
struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(Seed, Seed) = default;
};

/// splitmix64 finaliser; used to derive independent child streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for stream `stream` of `parent`. Fixed rule: mix(parent ^ mix(stream)).
constexpr Seed derive(Seed parent, std::uint64_t stream) noexcept {
    return Seed{mix64(parent.value ^ mix64(stream + 0x5851f42d4c957f2dULL))};
}

using Rng = std::mt19937_64;

inline Rng make_rng(Seed seed) { return Rng{seed.value}; }

} // namespace trendlab
