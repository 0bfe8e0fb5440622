#pragma once

#include <cstdint>
#include <random>

namespace cmp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from (seed, stream). Restart r of a fit
// uses mix_seed(cfg.rng_seed, r), CV cells mix fold and grid indices, etc.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(splitmix64(seed) ^ (0x9e3779b97f4a7c15ULL + stream));
}

inline Rng make_rng(std::uint64_t seed)
{
    return Rng(splitmix64(seed));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(mix_seed(seed, stream));
}

} // namespace cmp
