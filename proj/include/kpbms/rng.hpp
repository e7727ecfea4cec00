#pragma once

#include <cstdint>
#include <string_view>

namespace kpbms {

/// splitmix64 step; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Substream seed for (base seed, salt). Jobs seeded this way give
/// results independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return mix64(base ^ mix64(salt));
}

/// FNV-1a over a string, for salting streams by image id.
inline std::uint64_t hash_id(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace kpbms
