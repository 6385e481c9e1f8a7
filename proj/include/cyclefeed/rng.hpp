#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cyclefeed/errors.hpp"

namespace cyclefeed {

// splitmix64. Small, seedable and bit-identical on every platform, which is
// what corpus generation and the test generators need; std:: distributions
// are implementation-defined and would break committed golden files.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    uint64_t state() const { return state_; }

    // Unbiased integer in [0, n) by rejection sampling.
    uint64_t uniform_index(uint64_t n) {
        detail::require(n > 0, "Rng::uniform_index: n must be positive");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        detail::require(lo <= hi, "Rng::uniform_int: empty range");
        return lo + static_cast<int>(uniform_index(static_cast<uint64_t>(hi - lo) + 1));
    }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    template <class T>
    const T& choice(const std::vector<T>& items) {
        detail::require(!items.empty(), "Rng::choice: empty vector");
        return items[uniform_index(items.size())];
    }

private:
    uint64_t state_;
};

// FNV-1a, used for cache keys over snapshot blobs.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace cyclefeed
