#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "coneshap/errors.hpp"

namespace coneshap {

// Deterministic, portable RNG used everywhere randomness is needed.
//
// Core generator: xoshiro256** seeded through splitmix64, so any 64-bit seed
// yields a well-mixed state. Bounded draws use rejection sampling instead of
// std::uniform_int_distribution, whose output is implementation-defined.
//
// Stream splitting rule: the generator for logical stream (a, b) under root
// seed s is Rng(mix(mix(s, a), b)) where mix(x, y) feeds x ^ golden*(y+1)
// through one splitmix64 step. Per-(player, draw) estimator streams use
// a = player and b = draw, so results do not depend on how work is scheduled
// across threads.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
        std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
        return splitmix64_next(s);
    }

    // Substream for logical index (a, b) under a root seed.
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        return Rng(mix(mix(seed, a), b));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw PreconditionError("Rng::below requires n >= 1");
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), uniform over k-subsets (partial
    // Fisher-Yates). Order of the result is not meaningful.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        if (k > n) throw PreconditionError("sample_without_replacement: k > n");
        std::vector<std::uint32_t> pool(n);
        std::iota(pool.begin(), pool.end(), 0u);
        for (std::uint32_t i = 0; i < k; ++i) {
            const std::uint32_t j = i + static_cast<std::uint32_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace coneshap
