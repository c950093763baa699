#pragma once

#include <cstdint>
#include <boost/random/mersenne_twister.hpp>

namespace trnglab {

/// Engine used by every stochastic routine. Seeded per sample, never shared.
using Engine = boost::random::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Counter-mode sub-seed: a pure function of (seed, stream, index), so sample i
/// gets the same engine state no matter which order samples are evaluated in.
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index,
                                 std::uint64_t stream = 0) noexcept {
    return detail::splitmix64(detail::splitmix64(seed ^ detail::splitmix64(stream)) + index);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
    return Engine{sub_seed(seed, index, stream)};
}

} // namespace trnglab
