#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rfsad {

using RandomStream = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based key derivation: every (seed, k0, k1, ...) tuple maps to an
/// independent stream, so results never depend on generation order.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

inline RandomStream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    return RandomStream(derive_key(seed, keys));
}

} // namespace rfsad
