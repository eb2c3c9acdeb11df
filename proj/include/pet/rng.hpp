#pragma once

#include <cmath>
#include <cstdint>

namespace pet {

// Seeded, stream-splittable RNG helpers. Noise synthesis and bootstrap
// resampling derive independent streams from (seed, index) so results are
// identical regardless of how the work is partitioned across threads.

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stateless mix of up to three 64-bit words into one; used to derive
/// per-pixel / per-resample stream seeds.
inline uint64_t hash_combine(uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = a;
    uint64_t h = splitmix64(s);
    s ^= b + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h ^= splitmix64(s);
    s ^= c + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return splitmix64(s);
}

/// Small deterministic generator (splitmix64 core). Not cryptographic.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n). Unbiased via rejection.
    uint64_t next_below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller (uses two draws, no cached state).
    double next_normal() {
        double u1 = 0.0;
        do { u1 = next_double(); } while (u1 <= 0.0);
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Poisson draw. Knuth product method for small means, normal
    /// approximation above 64 (adequate for sensor shot noise in DN).
    double next_poisson(double mean) {
        if (mean <= 0.0) return 0.0;
        if (mean > 64.0) {
            double v = mean + std::sqrt(mean) * next_normal();
            return v < 0.0 ? 0.0 : std::floor(v + 0.5);
        }
        double limit = std::exp(-mean);
        double prod = next_double();
        double n = 0.0;
        while (prod > limit) {
            prod *= next_double();
            n += 1.0;
        }
        return n;
    }

private:
    uint64_t state_;
};

}  // namespace pet
