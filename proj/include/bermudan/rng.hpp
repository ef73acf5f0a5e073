#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bermudan {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used only to decorrelate stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Folds a root seed and a tuple of stream coordinates into one 64-bit key.
/// Streams with different coordinates are statistically independent for all
/// practical purposes; identical coordinates always give the same stream.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = mix64(seed);
    for (auto c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
    return Rng(stream_key(seed, coords));
}

}  // namespace bermudan
