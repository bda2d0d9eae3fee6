#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace guitraj {

inline constexpr std::uint64_t fnv1a_offset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t fnv1a_prime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = fnv1a_offset) noexcept {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= fnv1a_prime;
    }
    return state;
}

// Lowercase 16-digit hex.
std::string hex64(std::uint64_t value);

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace guitraj
