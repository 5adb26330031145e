#pragma once

#include <cmath>
#include <cstdint>

namespace regshb {

// xoshiro256** generator (Blackman & Vigna). State is seeded from four
// consecutive outputs of a splitmix64 sequence started at `seed`, so the
// whole stream is a bit-exact function of the 64-bit seed. Index draws use
// rejection sampling, never a bare modulo.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix_next(sm);
        has_cached_gaussian_ = false;
        cached_gaussian_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased uniform draw from {0, 1, ..., n-1}.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t v = next_u64();
            if (v >= threshold) return v % n;
        }
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [-1, 1).
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    // Standard normal via Box-Muller; the second variate is cached.
    double gaussian() {
        if (has_cached_gaussian_) {
            has_cached_gaussian_ = false;
            return cached_gaussian_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        cached_gaussian_ = rad * std::sin(ang);
        has_cached_gaussian_ = true;
        return rad * std::cos(ang);
    }

    // splitmix64 finalizer; used for seed mixing.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Independent per-trial stream: seed = mix(base ^ mix(key + 1)).
    static Rng stream(std::uint64_t base_seed, std::uint64_t key) {
        return Rng(mix(base_seed ^ mix(key + 1)));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix_next(std::uint64_t& state) {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t s_[4];
    bool has_cached_gaussian_;
    double cached_gaussian_;
};

}  // namespace regshb
