#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "guitraj/hash.hpp"

namespace guitraj {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// bounded draws and shuffles are done here to keep runs reproducible across
// standard libraries.
class rng {
public:
    explicit rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Derives an independent seed from a base seed and a key, so per-item
// randomness does not depend on processing order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = fnv1a_offset;
    for (int i = 0; i < 8; ++i) {
        h ^= (seed >> (8 * i)) & 0xff;
        h *= fnv1a_prime;
    }
    return fnv1a64(key, h);
}

}  // namespace guitraj
