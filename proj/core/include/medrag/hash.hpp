#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace medrag {

// 64-bit FNV-1a. Used everywhere a stable, platform-independent hash is
// needed (fixture filenames, prompt transcripts, the hashing embedder), so
// the constants here must never change.
inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t state = kFnvOffsetBasis) {
    for (unsigned char c : bytes) {
        state ^= static_cast<std::uint64_t>(c);
        state *= kFnvPrime;
    }
    return state;
}

// Seeded variant: the seed is folded in as 8 little-endian bytes before the
// payload, so equal payloads under different seeds diverge completely.
inline std::uint64_t fnv1a64_seeded(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t state = kFnvOffsetBasis;
    for (int i = 0; i < 8; ++i) {
        state ^= (seed >> (8 * i)) & 0xffULL;
        state *= kFnvPrime;
    }
    return fnv1a64(bytes, state);
}

std::string hex64(std::uint64_t value);

}  // namespace medrag
